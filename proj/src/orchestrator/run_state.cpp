// SPDX-License-Identifier: Apache-2.0
#include "meterstick/orchestrator/run_state.hpp"

#include <charconv>

#include "meterstick/common/error.hpp"

namespace meterstick::orchestrator {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::idle:
      return "idle";
    case Phase::initialized:
      return "initialized";
    case Phase::logging:
      return "logging";
    case Phase::emulating:
      return "emulating";
    case Phase::stopping:
      return "stopping";
    case Phase::converting:
      return "converting";
    case Phase::done:
      return "done";
  }
  return "?";
}

bool phase_allows(Verb v, Role role, Phase p) {
  const bool between_runs = p == Phase::idle || p == Phase::done;
  switch (v) {
    case Verb::set_server:
    case Verb::set_metrics_endpoint:
    case Verb::iter:
      return between_runs;
    case Verb::initialize:
      return p == Phase::idle;
    case Verb::log_start:
      return p == Phase::initialized;
    case Verb::log_stop:
      return p == Phase::logging;
    case Verb::stop_server:
      // Also the abort path after a failed step.
      return p == Phase::initialized || p == Phase::logging || p == Phase::stopping;
    case Verb::connect:
      return p == Phase::idle;
    case Verb::convert:
      return role == Role::server_node ? p == Phase::converting : p == Phase::emulating;
    case Verb::keep_alive:
    case Verb::exit:
      return true;
    case Verb::ok:
    case Verb::err:
      return false;
  }
  return false;
}

namespace {

Phase next_phase(Verb v, Role role, Phase p) {
  switch (v) {
    case Verb::iter:
      return Phase::idle;
    case Verb::initialize:
      return Phase::initialized;
    case Verb::log_start:
      return Phase::logging;
    case Verb::log_stop:
      return Phase::stopping;
    case Verb::stop_server:
      return Phase::converting;
    case Verb::connect:
      return Phase::emulating;
    case Verb::convert:
      return Phase::done;
    default:
      (void)role;
      return p;
  }
}

}  // namespace

Transition handle_control_message(const RunState& state, const ControlMessage& msg, Role role, Effects& effects) {
  Transition t;
  t.state = state;
  if (!verb_allowed(msg.verb, role) || role == Role::controller) {
    t.reply = ControlMessage::error("wrong-dest");
    return t;
  }
  if (!phase_allows(msg.verb, role, state.phase)) {
    t.reply = ControlMessage::error("bad-phase " + std::string(verb_name(msg.verb)) + " in " +
                                    std::string(phase_name(state.phase)));
    return t;
  }
  RunState next = state;
  try {
    switch (msg.verb) {
      case Verb::set_server:
        t.effect_ran = true;
        effects.set_server(msg.arg);
        next.server = msg.arg;
        break;
      case Verb::set_metrics_endpoint:
        t.effect_ran = true;
        effects.set_metrics_endpoint(msg.arg);
        next.metrics_endpoint = msg.arg;
        break;
      case Verb::iter: {
        std::uint32_t it = 0;
        const auto [p, ec] = std::from_chars(msg.arg.data(), msg.arg.data() + msg.arg.size(), it);
        if (ec != std::errc{} || p != msg.arg.data() + msg.arg.size()) throw ProtocolError("parse iter");
        t.effect_ran = true;
        effects.set_iteration(it);
        next.iteration = it;
        break;
      }
      case Verb::initialize:
        t.effect_ran = true;
        effects.initialize(msg.arg);
        break;
      case Verb::log_start:
        t.effect_ran = true;
        effects.log_start(msg.arg);
        break;
      case Verb::log_stop:
        t.effect_ran = true;
        effects.log_stop(msg.arg);
        break;
      case Verb::stop_server:
        t.effect_ran = true;
        effects.stop_server();
        break;
      case Verb::connect:
        t.effect_ran = true;
        effects.connect(msg.arg);
        break;
      case Verb::convert:
        t.effect_ran = true;
        effects.convert(msg.arg);
        break;
      case Verb::keep_alive:
        break;
      case Verb::exit:
        t.exit = true;
        break;
      case Verb::ok:
      case Verb::err:
        break;
    }
  } catch (const std::exception& e) {
    t.reply = ControlMessage::error(e.what());
    return t;
  }
  next.phase = next_phase(msg.verb, role, state.phase);
  t.state = next;
  t.reply = ControlMessage::ok();
  return t;
}

Transition handle_control_line(const RunState& state, std::string_view line, Role role, Effects& effects) {
  ControlMessage msg;
  try {
    msg = parse_message(line);
  } catch (const ProtocolError& e) {
    Transition t;
    t.state = state;
    t.reply = ControlMessage::error(std::string("parse ") + e.what());
    return t;
  }
  return handle_control_message(state, msg, role, effects);
}

}  // namespace meterstick::orchestrator
