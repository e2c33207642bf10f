// SPDX-License-Identifier: Apache-2.0
#include "meterstick/common/log.hpp"

namespace meterstick::log {

void set_level(const std::string& name) {
  const auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") return;
  spdlog::set_level(level);
}

}  // namespace meterstick::log
