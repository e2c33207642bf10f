// SPDX-License-Identifier: Apache-2.0
// Every tunable constant of the environment simulation lives here.
#pragma once

#include <cstdint>

namespace meterstick::world {

struct WorldParams {
  // Explosions.
  double blast_radius = 4.0;
  int chain_fuse_min = 10;
  int chain_fuse_max = 30;
  int ignition_fuse = 80;
  double knockback = 1.0;
  int exposure_samples = 2;  // per axis
  double ray_step = 0.5;
  double debris_speed = 0.3;

  // Terrain rules.
  int water_max_level = 7;
  int signal_max = 15;
  int growth_interval = 80;
  int kelp_max_stage = 15;

  // Entity physics, cells and ticks.
  double gravity = 0.08;
  double max_fall_speed = 3.92;
  double water_gravity = 0.02;
  double water_drag = 0.8;
  double water_current = 0.014;
  double ground_friction = 0.6;
  double max_speed = 4.0;
  double push_radius = 0.6;
  double push_strength = 0.05;
  double npc_speed = 0.15;
  double jump_speed = 0.42;
  int item_lifetime = 6000;

  // Pathfinding.
  int path_vicinity = 8;
  int max_path_expansions = 4096;

  // Spawning.
  int mob_cap = 8;
  int spawn_interval = 20;
  int spawn_column_budget = 64;
  int spawn_min_distance = 8;
  int spawn_max_distance = 32;

  // Constructs.
  int hopper_capacity = 15;
  int farm_interval = 80;
  int farm_spawn_count = 40;
  int transfer_interval = 8;
  int regrow_delay = 20;
};

}  // namespace meterstick::world
