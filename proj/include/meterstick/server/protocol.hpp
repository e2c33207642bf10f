// SPDX-License-Identifier: Apache-2.0
// Game wire protocol: one JSON object per line in each direction. The field
// by field schema is in docs/protocol.md.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "meterstick/world/block.hpp"

namespace meterstick::server {

enum class ActionKind : std::uint8_t { join, move, place_block, break_block, chat, ping };
enum class UpdateKind : std::uint8_t { join_ack, block_update, entity_update, chat_event, pong };

std::string_view action_name(ActionKind k);
std::string_view update_name(UpdateKind k);

inline constexpr std::size_t kMaxChatBytes = 256;

struct PlayerAction {
  ActionKind kind = ActionKind::ping;
  std::string name;          // join
  int dx = 0;                // move: horizontal step, |dx| + |dz| <= 1
  int dz = 0;
  world::BlockPos pos;       // place_block, break_block
  world::Block block;        // place_block
  std::uint64_t nonce = 0;   // chat, ping
  std::string text;          // chat

  friend bool operator==(const PlayerAction&, const PlayerAction&) = default;
};

struct StateUpdate {
  UpdateKind kind = UpdateKind::pong;
  std::uint64_t tick = 0;
  std::uint64_t session = 0;   // join_ack
  world::BlockPos pos;         // join_ack (spawn cell), block_update
  world::Block block;          // block_update
  std::uint64_t entity = 0;    // entity_update
  world::Vec3 epos;            // entity_update
  world::Vec3 evel;            // entity_update
  std::string from;            // chat_event
  std::uint64_t nonce = 0;     // chat_event, pong
  std::string text;            // chat_event

  friend bool operator==(const StateUpdate&, const StateUpdate&) = default;
};

/// Throws meterstick::ProtocolError on malformed lines or values out of range.
PlayerAction decode_action(std::string_view line);
std::string encode_action(const PlayerAction& a);

StateUpdate decode_update(std::string_view line);
std::string encode_update(const StateUpdate& u);

/// Cheap check for chat_event lines, so clients can skip parsing the bulk of
/// the update stream.
bool looks_like_chat_event(std::string_view line);

}  // namespace meterstick::server
