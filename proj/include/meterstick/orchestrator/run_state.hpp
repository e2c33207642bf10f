// SPDX-License-Identifier: Apache-2.0
// Worker-side lifecycle state machine. Effects are delegated to an Effects
// object so the transition logic can be tested without processes or sockets.
#pragma once

#include <cstdint>
#include <string>

#include "meterstick/orchestrator/control_message.hpp"

namespace meterstick::orchestrator {

enum class Phase : std::uint8_t { idle, initialized, logging, emulating, stopping, converting, done };

std::string_view phase_name(Phase p);

struct RunState {
  std::uint32_t iteration = 0;
  Phase phase = Phase::idle;
  bool resume = false;
  std::string server;
  std::string metrics_endpoint;

  friend bool operator==(const RunState&, const RunState&) = default;
};

/// Side effects of the control verbs. Each throws meterstick::Error on
/// failure; the message is sent back as `err:<what>`.
class Effects {
 public:
  virtual ~Effects() = default;
  virtual void set_server(const std::string& /*name*/) {}
  virtual void set_metrics_endpoint(const std::string& /*endpoint*/) {}
  virtual void set_iteration(std::uint32_t /*iteration*/) {}
  virtual void initialize(const std::string& /*arg*/) {}
  virtual void log_start(const std::string& /*arg*/) {}
  virtual void log_stop(const std::string& /*arg*/) {}
  virtual void stop_server() {}
  virtual void connect(const std::string& /*arg*/) {}
  virtual void convert(const std::string& /*arg*/) {}
};

struct Transition {
  RunState state;
  ControlMessage reply;
  /// An effect ran (successfully or not).
  bool effect_ran = false;
  /// The worker should close the connection after sending the reply.
  bool exit = false;
};

/// Phase in which the verb is legal for the role, or nullopt if it never is
/// (ignoring keep_alive and exit, which are always legal).
bool phase_allows(Verb v, Role role, Phase phase);

/// Applies one message. Illegal destinations are rejected before any effect
/// (`err:wrong-dest`); so are verbs out of lifecycle order (`err:bad-phase ...`).
/// When an effect fails the state is left unchanged.
Transition handle_control_message(const RunState& state, const ControlMessage& msg, Role role, Effects& effects);

/// Parses a raw line first; malformed lines give `err:parse ...`.
Transition handle_control_line(const RunState& state, std::string_view line, Role role, Effects& effects);

}  // namespace meterstick::orchestrator
