// SPDX-License-Identifier: Apache-2.0
#include "meterstick/server/protocol.hpp"

#include <array>
#include <cstdlib>
#include <nlohmann/json.hpp>

#include "meterstick/common/error.hpp"

namespace meterstick::server {

namespace {

using nlohmann::json;
using world::Block;
using world::BlockKind;
using world::BlockPos;

constexpr std::array<std::string_view, 6> kActionNames = {"join", "move", "place_block", "break_block", "chat", "ping"};
constexpr std::array<std::string_view, 5> kUpdateNames = {"join_ack", "block_update", "entity_update", "chat_event",
                                                          "pong"};

json parse_object(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed: not a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("malformed: missing field ") + key);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("malformed: bad type for ") + key);
  }
}

int small_int(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("malformed: missing field ") + key);
  if (!it->is_number_integer()) throw ProtocolError(std::string("malformed: bad type for ") + key);
  const auto v = it->get<std::int64_t>();
  if (v < -(1 << 20) || v > (1 << 20)) throw ProtocolError(std::string("malformed: out of range ") + key);
  return static_cast<int>(v);
}

std::uint64_t unsigned_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(std::string("malformed: missing field ") + key);
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    throw ProtocolError(std::string("malformed: bad type for ") + key);
  }
  return it->get<std::uint64_t>();
}

BlockPos pos_of(const json& j) { return {small_int(j, "x"), small_int(j, "y"), small_int(j, "z")}; }

void put_pos(json& j, const BlockPos& p) {
  j["x"] = p.x;
  j["y"] = p.y;
  j["z"] = p.z;
}

Block block_of(const json& j) {
  const auto name = field<std::string>(j, "block");
  const auto kind = world::parse_block(name);
  if (!kind) throw ProtocolError("malformed: unknown block " + name);
  int aux = 0;
  if (j.contains("aux")) aux = small_int(j, "aux");
  Block b{*kind, static_cast<std::uint8_t>(aux)};
  if (aux < 0 || aux > 255 || !b.valid()) throw ProtocolError("malformed: aux out of range");
  return b;
}

template <std::size_t N>
std::size_t kind_index(const std::array<std::string_view, N>& names, const std::string& k) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == k) return i;
  }
  throw ProtocolError("malformed: unknown kind " + k);
}

}  // namespace

std::string_view action_name(ActionKind k) { return kActionNames[static_cast<std::size_t>(k)]; }
std::string_view update_name(UpdateKind k) { return kUpdateNames[static_cast<std::size_t>(k)]; }

PlayerAction decode_action(std::string_view line) {
  const json j = parse_object(line);
  PlayerAction a;
  a.kind = static_cast<ActionKind>(kind_index(kActionNames, field<std::string>(j, "kind")));
  switch (a.kind) {
    case ActionKind::join:
      a.name = field<std::string>(j, "name");
      if (a.name.empty() || a.name.size() > 64) throw ProtocolError("malformed: bad name");
      break;
    case ActionKind::move:
      a.dx = small_int(j, "dx");
      a.dz = small_int(j, "dz");
      if (std::abs(a.dx) + std::abs(a.dz) > 1) throw ProtocolError("malformed: move longer than one cell");
      break;
    case ActionKind::place_block:
      a.pos = pos_of(j);
      a.block = block_of(j);
      break;
    case ActionKind::break_block:
      a.pos = pos_of(j);
      break;
    case ActionKind::chat:
      a.nonce = unsigned_field(j, "nonce");
      a.text = j.contains("text") ? field<std::string>(j, "text") : std::string();
      if (a.text.size() > kMaxChatBytes) throw ProtocolError("malformed: chat text too long");
      break;
    case ActionKind::ping:
      a.nonce = unsigned_field(j, "nonce");
      break;
  }
  return a;
}

std::string encode_action(const PlayerAction& a) {
  json j;
  j["kind"] = action_name(a.kind);
  switch (a.kind) {
    case ActionKind::join:
      j["name"] = a.name;
      break;
    case ActionKind::move:
      j["dx"] = a.dx;
      j["dz"] = a.dz;
      break;
    case ActionKind::place_block:
      put_pos(j, a.pos);
      j["block"] = world::block_name(a.block.kind);
      j["aux"] = a.block.aux;
      break;
    case ActionKind::break_block:
      put_pos(j, a.pos);
      break;
    case ActionKind::chat:
      j["nonce"] = a.nonce;
      j["text"] = a.text;
      break;
    case ActionKind::ping:
      j["nonce"] = a.nonce;
      break;
  }
  return j.dump();
}

StateUpdate decode_update(std::string_view line) {
  const json j = parse_object(line);
  StateUpdate u;
  u.kind = static_cast<UpdateKind>(kind_index(kUpdateNames, field<std::string>(j, "kind")));
  u.tick = unsigned_field(j, "tick");
  switch (u.kind) {
    case UpdateKind::join_ack:
      u.session = unsigned_field(j, "session");
      u.pos = pos_of(j);
      break;
    case UpdateKind::block_update:
      u.pos = pos_of(j);
      u.block = block_of(j);
      break;
    case UpdateKind::entity_update:
      u.entity = unsigned_field(j, "id");
      u.epos = {field<double>(j, "x"), field<double>(j, "y"), field<double>(j, "z")};
      u.evel = {field<double>(j, "vx"), field<double>(j, "vy"), field<double>(j, "vz")};
      break;
    case UpdateKind::chat_event:
      u.from = field<std::string>(j, "from");
      u.nonce = unsigned_field(j, "nonce");
      u.text = field<std::string>(j, "text");
      break;
    case UpdateKind::pong:
      u.nonce = unsigned_field(j, "nonce");
      break;
  }
  return u;
}

std::string encode_update(const StateUpdate& u) {
  json j;
  j["kind"] = update_name(u.kind);
  j["tick"] = u.tick;
  switch (u.kind) {
    case UpdateKind::join_ack:
      j["session"] = u.session;
      put_pos(j, u.pos);
      break;
    case UpdateKind::block_update:
      put_pos(j, u.pos);
      j["block"] = world::block_name(u.block.kind);
      j["aux"] = u.block.aux;
      break;
    case UpdateKind::entity_update:
      j["id"] = u.entity;
      j["x"] = u.epos.x;
      j["y"] = u.epos.y;
      j["z"] = u.epos.z;
      j["vx"] = u.evel.x;
      j["vy"] = u.evel.y;
      j["vz"] = u.evel.z;
      break;
    case UpdateKind::chat_event:
      j["from"] = u.from;
      j["nonce"] = u.nonce;
      j["text"] = u.text;
      break;
    case UpdateKind::pong:
      j["nonce"] = u.nonce;
      break;
  }
  return j.dump();
}

bool looks_like_chat_event(std::string_view line) {
  return line.find("\"chat_event\"") != std::string_view::npos;
}

}  // namespace meterstick::server
