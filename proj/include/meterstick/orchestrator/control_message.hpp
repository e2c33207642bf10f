// SPDX-License-Identifier: Apache-2.0
// Controller <-> worker messages: one ASCII line per message, `verb` or
// `verb:arg`. Extended arguments are space-separated key=value pairs.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace meterstick::orchestrator {

enum class Verb : std::uint8_t {
  set_server,
  set_metrics_endpoint,
  iter,
  initialize,
  log_start,
  log_stop,
  stop_server,
  connect,
  convert,
  ok,
  keep_alive,
  err,
  exit,
};
inline constexpr std::size_t kVerbCount = 13;

std::string_view verb_name(Verb v);
std::optional<Verb> parse_verb(std::string_view name);

enum class Role : std::uint8_t { server_node, emulation_node, controller };

std::string_view role_name(Role r);
std::optional<Role> parse_role(std::string_view name);

/// Who a verb is addressed to. convert is accepted by both worker roles
/// because tick traces are produced on the server node; keep_alive flows in
/// both directions.
bool verb_allowed(Verb v, Role destination);

struct ControlMessage {
  Verb verb = Verb::ok;
  std::string arg;

  static ControlMessage ok() { return {Verb::ok, {}}; }
  static ControlMessage error(std::string detail) { return {Verb::err, std::move(detail)}; }

  friend bool operator==(const ControlMessage&, const ControlMessage&) = default;
};

/// Wire form without the newline.
std::string format_message(const ControlMessage& m);
/// Throws meterstick::ProtocolError on an unknown verb or a bare verb that
/// requires an argument.
ControlMessage parse_message(std::string_view line);

using KeyValues = std::map<std::string, std::string>;
/// "a=1 b=x" -> {a:1, b:x}. Throws ProtocolError on a token without '='.
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& kv);

}  // namespace meterstick::orchestrator
