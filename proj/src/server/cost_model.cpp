// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/cost_model.hpp"

#include <charconv>
#include <map>
#include <string_view>

#include <fmt/format.h>

#include "meterstick/common/error.hpp"

namespace meterstick::server {

std::int64_t CostModel::cost_ns(const world::WorkCounters& w) const {
  if (!enabled) return 0;
  auto c = [](std::uint64_t n, std::int64_t per) { return static_cast<std::int64_t>(n) * per; };
  return c(w.actions, action_ns) + c(w.rule_evals, rule_eval_ns) + c(w.block_changes, block_change_ns) +
         c(w.light_updates, light_update_ns) + c(w.entity_updates, entity_update_ns) +
         c(w.collision_checks, collision_check_ns) + c(w.ray_steps, ray_step_ns) +
         c(w.path_expansions, path_expansion_ns) + c(w.spawn_columns, spawn_column_ns) +
         c(w.updates_sent, update_sent_ns) + c(w.chunks_saved, chunk_saved_ns);
}

CostModel CostModel::parse(const std::string& text) {
  CostModel m;
  if (text.empty() || text == "default" || text == "on") return m;
  if (text == "off") {
    m.enabled = false;
    return m;
  }
  const std::map<std::string_view, std::int64_t CostModel::*> fields = {
      {"tick_overhead_ns", &CostModel::tick_overhead_ns},
      {"action_ns", &CostModel::action_ns},
      {"rule_eval_ns", &CostModel::rule_eval_ns},
      {"block_change_ns", &CostModel::block_change_ns},
      {"light_update_ns", &CostModel::light_update_ns},
      {"entity_update_ns", &CostModel::entity_update_ns},
      {"collision_check_ns", &CostModel::collision_check_ns},
      {"ray_step_ns", &CostModel::ray_step_ns},
      {"path_expansion_ns", &CostModel::path_expansion_ns},
      {"spawn_column_ns", &CostModel::spawn_column_ns},
      {"update_sent_ns", &CostModel::update_sent_ns},
      {"chunk_saved_ns", &CostModel::chunk_saved_ns},
  };
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("cost model entry '{}' is not field=value", item));
    const auto it = fields.find(item.substr(0, eq));
    if (it == fields.end()) throw ConfigError(fmt::format("unknown cost model field '{}'", item.substr(0, eq)));
    const auto value = item.substr(eq + 1);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || v < 0) {
      throw ConfigError(fmt::format("bad cost model value '{}'", item));
    }
    m.*(it->second) = v;
  }
  return m;
}

}  // namespace meterstick::server
