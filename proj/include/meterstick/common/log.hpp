// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <spdlog/spdlog.h>

namespace meterstick::log {

/// Set the process-wide level from a name ("trace".."off"); unknown names keep the default.
void set_level(const std::string& name);

using spdlog::debug;
using spdlog::error;
using spdlog::info;
using spdlog::warn;

}  // namespace meterstick::log
