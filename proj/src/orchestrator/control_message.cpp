// SPDX-License-Identifier: Apache-2.0
#include "meterstick/orchestrator/control_message.hpp"

#include <array>

#include "meterstick/common/error.hpp"

namespace meterstick::orchestrator {

namespace {

constexpr std::array<std::string_view, kVerbCount> kVerbNames = {
    "set_server", "set_metrics_endpoint", "iter", "initialize", "log_start", "log_stop", "stop_server",
    "connect",    "convert",              "ok",   "keep_alive", "err",       "exit",
};

bool needs_arg(Verb v) {
  return v == Verb::set_server || v == Verb::set_metrics_endpoint || v == Verb::iter;
}

}  // namespace

std::string_view verb_name(Verb v) { return kVerbNames[static_cast<std::size_t>(v)]; }

std::optional<Verb> parse_verb(std::string_view name) {
  for (std::size_t i = 0; i < kVerbCount; ++i) {
    if (kVerbNames[i] == name) return static_cast<Verb>(i);
  }
  // The original name of the metrics endpoint message.
  if (name == "set_jmx") return Verb::set_metrics_endpoint;
  return std::nullopt;
}

std::string_view role_name(Role r) {
  switch (r) {
    case Role::server_node:
      return "server_node";
    case Role::emulation_node:
      return "emulation_node";
    case Role::controller:
      return "controller";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view name) {
  if (name == "server_node" || name == "server" || name == "M") return Role::server_node;
  if (name == "emulation_node" || name == "emulation" || name == "Y") return Role::emulation_node;
  if (name == "controller" || name == "C") return Role::controller;
  return std::nullopt;
}

bool verb_allowed(Verb v, Role d) {
  const bool m = d == Role::server_node;
  const bool y = d == Role::emulation_node;
  const bool c = d == Role::controller;
  switch (v) {
    case Verb::set_server:
    case Verb::iter:
    case Verb::exit:
    case Verb::convert:
      return m || y;
    case Verb::set_metrics_endpoint:
    case Verb::initialize:
    case Verb::log_start:
    case Verb::log_stop:
    case Verb::stop_server:
      return m;
    case Verb::connect:
      return y;
    case Verb::ok:
    case Verb::err:
      return c;
    case Verb::keep_alive:
      return true;
  }
  return false;
}

std::string format_message(const ControlMessage& m) {
  std::string out(verb_name(m.verb));
  if (!m.arg.empty()) {
    out += ':';
    // One message per line: flatten anything that would split it.
    for (char ch : m.arg) out += (ch == '\n' || ch == '\r') ? ' ' : ch;
  }
  return out;
}

ControlMessage parse_message(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  const auto colon = line.find(':');
  const std::string_view name = line.substr(0, colon);
  const auto verb = parse_verb(name);
  if (!verb) throw ProtocolError("unknown verb '" + std::string(name) + "'");
  ControlMessage m;
  m.verb = *verb;
  if (colon != std::string_view::npos) m.arg = std::string(line.substr(colon + 1));
  if (m.arg.empty() && needs_arg(m.verb)) throw ProtocolError(std::string(name) + " needs an argument");
  if (m.verb == Verb::iter) {
    for (char ch : m.arg) {
      if (ch < '0' || ch > '9') throw ProtocolError("iter needs a non-negative integer");
    }
    if (m.arg.size() > 9) throw ProtocolError("iteration out of range");
  }
  return m;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size()) break;
    const auto end = std::min(text.find(' ', i), text.size());
    const std::string_view tok = text.substr(i, end - i);
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0) throw ProtocolError("expected key=value, got '" + std::string(tok) + "'");
    kv[std::string(tok.substr(0, eq))] = std::string(tok.substr(eq + 1));
    i = end;
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

}  // namespace meterstick::orchestrator
