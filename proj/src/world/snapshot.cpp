// SPDX-License-Identifier: Apache-2.0
#include "meterstick/world/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "meterstick/common/error.hpp"

namespace meterstick::world {

struct SnapshotAccess {
  static void set_next_entity_id(WorldState& w, EntityId id) { w.next_entity_id_ = id; }
};

namespace {

constexpr char kMagic[8] = {'M', 'S', 'W', 'S', 'N', 'A', 'P', '\0'};
constexpr char kTrailer[4] = {'E', 'N', 'D', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.write(buf, sizeof(T));
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void pos(const BlockPos& p) {
    put<std::int32_t>(p.x);
    put<std::int32_t>(p.y);
    put<std::int32_t>(p.z);
  }
  void positions(const std::vector<BlockPos>& v) {
    put<std::uint64_t>(v.size());
    for (const auto& p : v) pos(p);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T get() {
    char buf[sizeof(T)];
    raw(buf, sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated snapshot", offset_);
    offset_ += n;
  }
  BlockPos pos() {
    BlockPos p;
    p.x = get<std::int32_t>();
    p.y = get<std::int32_t>();
    p.z = get<std::int32_t>();
    return p;
  }
  std::uint64_t count(std::uint64_t limit) {
    const auto at = offset_;
    const auto n = get<std::uint64_t>();
    if (n > limit) throw FormatError("implausible element count", at);
    return n;
  }
  std::vector<BlockPos> positions() {
    const auto n = count(1ULL << 26);
    std::vector<BlockPos> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(pos());
    return v;
  }
  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_snapshot(std::ostream& out, const WorldState& w) {
  Writer o(out);
  o.raw(kMagic, sizeof(kMagic));
  o.put<std::uint32_t>(kSnapshotVersion);
  o.put<std::int32_t>(w.dims().chunks_x);
  o.put<std::int32_t>(w.dims().chunks_z);
  o.put<std::int32_t>(w.dims().height);
  o.put<std::uint64_t>(w.seed());
  o.put<std::uint64_t>(w.tick_counter());
  o.put<std::uint64_t>(w.next_entity_id());

  // Cells, run-length encoded in chunk order.
  for (std::size_t c = 0; c < w.chunk_count(); ++c) {
    const auto cells = w.chunk(c).cells();
    std::size_t i = 0;
    while (i < cells.size()) {
      std::size_t j = i + 1;
      while (j < cells.size() && cells[j] == cells[i] && j - i < 0xffffffffu) ++j;
      o.put<std::uint32_t>(static_cast<std::uint32_t>(j - i));
      o.put<std::uint8_t>(static_cast<std::uint8_t>(cells[i].kind));
      o.put<std::uint8_t>(cells[i].aux);
      i = j;
    }
  }

  o.put<std::uint64_t>(w.entities().size());
  for (const auto& e : w.entities()) {
    o.put<std::uint64_t>(e.id);
    o.put<std::uint8_t>(static_cast<std::uint8_t>(e.kind));
    for (double v : {e.pos.x, e.pos.y, e.pos.z, e.vel.x, e.vel.y, e.vel.z}) o.put<double>(v);
    o.put<std::int32_t>(e.payload);
    o.put<std::uint32_t>(e.age);
    o.put<std::int32_t>(e.owner);
    o.put<std::uint8_t>(e.path.has_value());
    if (e.path) {
      o.put<std::uint32_t>(e.path_next);
      o.positions(*e.path);
    }
  }

  o.positions(std::vector<BlockPos>(w.update_queue().items().begin(), w.update_queue().items().end()));

  std::uint64_t scheduled = 0;
  for (const auto& [tick, list] : w.scheduled()) scheduled += list.size();
  o.put<std::uint64_t>(scheduled);
  for (const auto& [tick, list] : w.scheduled()) {
    for (const auto& p : list) {
      o.put<std::uint64_t>(tick);
      o.pos(p);
    }
  }

  o.put<std::uint64_t>(w.timers().size());
  for (const auto& t : w.timers()) {
    o.pos(t.pos);
    o.put<std::uint32_t>(t.delay);
    o.put<std::uint8_t>(t.fire_at.has_value());
    o.put<std::uint64_t>(t.fire_at.value_or(0));
    o.put<std::uint8_t>(t.fired);
  }
  o.put<std::uint64_t>(w.clocks().size());
  for (const auto& c : w.clocks()) {
    o.pos(c.pos);
    o.put<std::uint32_t>(c.half_period);
    o.put<std::uint32_t>(c.phase);
  }
  o.put<std::uint64_t>(w.constructs().size());
  for (const auto& c : w.constructs()) {
    o.put<std::uint8_t>(static_cast<std::uint8_t>(c.kind));
    o.put<std::int32_t>(c.tile);
    o.put<std::uint32_t>(c.phase);
    o.put<std::uint64_t>(c.state);
    o.put<std::uint64_t>(c.produced);
    o.positions(c.cells_a);
    o.positions(c.cells_b);
  }
  o.raw(kTrailer, sizeof(kTrailer));
}

WorldState read_snapshot(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw FormatError("not a world snapshot", 0);
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version), 8);
  }
  WorldDims dims;
  dims.chunks_x = r.get<std::int32_t>();
  dims.chunks_z = r.get<std::int32_t>();
  dims.height = r.get<std::int32_t>();
  if (dims.chunks_x <= 0 || dims.chunks_z <= 0 || dims.chunks_x > 256 || dims.chunks_z > 256 || dims.height <= 0 ||
      dims.height > 1024) {
    throw FormatError("invalid world dimensions", 12);
  }
  const auto seed = r.get<std::uint64_t>();
  WorldState w(dims, seed);
  w.set_tick_counter(r.get<std::uint64_t>());
  SnapshotAccess::set_next_entity_id(w, r.get<std::uint64_t>());

  for (std::size_t c = 0; c < w.chunk_count(); ++c) {
    const BlockPos origin = w.chunk(c).origin();
    const auto total = w.chunk(c).cells().size();
    std::size_t i = 0;
    while (i < total) {
      const auto at = r.offset();
      const auto run = r.get<std::uint32_t>();
      const auto kind = r.get<std::uint8_t>();
      const auto aux = r.get<std::uint8_t>();
      const Block b{static_cast<BlockKind>(kind), aux};
      if (run == 0 || i + run > total || kind >= kBlockKindCount || !b.valid() ||
          (b.kind == BlockKind::air && aux != 0)) {
        throw FormatError("corrupt cell run", at);
      }
      if (b.kind != BlockKind::air) {
        for (std::size_t k = i; k < i + run; ++k) {
          const int lx = static_cast<int>(k % kChunkSize);
          const int lz = static_cast<int>((k / kChunkSize) % kChunkSize);
          const int ly = static_cast<int>(k / (kChunkSize * kChunkSize));
          w.set_block_raw({origin.x + lx, ly, origin.z + lz}, b);
        }
      }
      i += run;
    }
  }

  const auto n_entities = r.count(1ULL << 26);
  for (std::uint64_t i = 0; i < n_entities; ++i) {
    const auto at = r.offset();
    Entity e;
    e.id = r.get<std::uint64_t>();
    const auto kind = r.get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(EntityKind::tnt_primed)) throw FormatError("bad entity kind", at);
    e.kind = static_cast<EntityKind>(kind);
    e.pos.x = r.get<double>();
    e.pos.y = r.get<double>();
    e.pos.z = r.get<double>();
    e.vel.x = r.get<double>();
    e.vel.y = r.get<double>();
    e.vel.z = r.get<double>();
    e.payload = r.get<std::int32_t>();
    e.age = r.get<std::uint32_t>();
    e.owner = r.get<std::int32_t>();
    if (r.get<std::uint8_t>()) {
      e.path_next = r.get<std::uint32_t>();
      e.path = r.positions();
    }
    if (!w.entities().empty() && w.entities().back().id >= e.id) throw FormatError("entity ids not ascending", at);
    if (e.id >= w.next_entity_id()) throw FormatError("entity id beyond allocator", at);
    w.entities().push_back(std::move(e));
  }

  for (const auto& p : r.positions()) {
    if (!w.in_bounds(p)) throw FormatError("queued position out of bounds", r.offset());
    w.update_queue().push(p);
  }
  const auto n_sched = r.count(1ULL << 26);
  for (std::uint64_t i = 0; i < n_sched; ++i) {
    const auto tick = r.get<std::uint64_t>();
    w.schedule(r.pos(), tick);
  }
  const auto n_timers = r.count(1ULL << 20);
  for (std::uint64_t i = 0; i < n_timers; ++i) {
    Timer t;
    t.pos = r.pos();
    t.delay = r.get<std::uint32_t>();
    const bool armed = r.get<std::uint8_t>() != 0;
    const auto fire_at = r.get<std::uint64_t>();
    if (armed) t.fire_at = fire_at;
    t.fired = r.get<std::uint8_t>() != 0;
    w.timers().push_back(t);
  }
  const auto n_clocks = r.count(1ULL << 20);
  for (std::uint64_t i = 0; i < n_clocks; ++i) {
    ClockCircuit c;
    c.pos = r.pos();
    c.half_period = r.get<std::uint32_t>();
    c.phase = r.get<std::uint32_t>();
    w.clocks().push_back(c);
  }
  const auto n_constructs = r.count(1ULL << 20);
  for (std::uint64_t i = 0; i < n_constructs; ++i) {
    const auto at = r.offset();
    Construct c;
    const auto kind = r.get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(ConstructKind::item_sorter)) throw FormatError("bad construct kind", at);
    c.kind = static_cast<ConstructKind>(kind);
    c.tile = r.get<std::int32_t>();
    c.phase = r.get<std::uint32_t>();
    c.state = r.get<std::uint64_t>();
    c.produced = r.get<std::uint64_t>();
    c.cells_a = r.positions();
    c.cells_b = r.positions();
    w.constructs().push_back(std::move(c));
  }
  char trailer[4];
  const auto at = r.offset();
  r.raw(trailer, sizeof(trailer));
  if (std::memcmp(trailer, kTrailer, sizeof(trailer)) != 0) throw FormatError("missing snapshot trailer", at);
  return w;
}

void save_snapshot(const std::string& path, const WorldState& world) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  write_snapshot(out, world);
  if (!out) throw Error("write failed: " + path);
}

WorldState load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_snapshot(in);
}

void write_block_csv(std::ostream& out, const WorldState& w) {
  out << "x,y,z,kind,aux\n";
  for (std::size_t c = 0; c < w.chunk_count(); ++c) {
    const auto& chunk = w.chunk(c);
    for (int y = 0; y < chunk.height(); ++y) {
      for (int z = 0; z < kChunkSize; ++z) {
        for (int x = 0; x < kChunkSize; ++x) {
          const Block b = chunk.at(x, y, z);
          if (b.kind == BlockKind::air) continue;
          out << chunk.origin().x + x << ',' << y << ',' << chunk.origin().z + z << ',' << block_name(b.kind) << ','
              << static_cast<int>(b.aux) << '\n';
        }
      }
    }
  }
}

void write_entity_csv(std::ostream& out, const WorldState& w) {
  out << "id,kind,x,y,z,vx,vy,vz,payload\n";
  for (const auto& e : w.entities()) {
    out << e.id << ',' << entity_kind_name(e.kind) << ',' << e.pos.x << ',' << e.pos.y << ',' << e.pos.z << ','
        << e.vel.x << ',' << e.vel.y << ',' << e.vel.z << ',' << e.payload << '\n';
  }
}

}  // namespace meterstick::world
