#include <bit>
#include <fstream>
#include <iterator>

#include "ecosim/io.hpp"

namespace ecosim {

namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'C', 'O', 'S'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void text(const std::string& s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void layer(const std::vector<std::int32_t>& values) {
    for (auto v : values) i32(v);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string text() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::vector<std::int32_t> layer(std::size_t n) {
    need(n * 4);
    std::vector<std::int32_t> values(n);
    for (auto& v : values) v = i32();
    return values;
  }
  [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > bytes_.size()) throw SnapshotError("snapshot is truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::vector<std::uint8_t> encode_snapshot(const SimConfig& cfg, const WorldState& world,
                                          const PolicyPool& pool) {
  Writer w;
  for (auto b : kMagic) w.u8(b);
  w.u32(kSnapshotVersion);
  w.text(config_to_json(cfg));
  w.u64(world.step);
  w.u64(world.seed);
  w.i32(world.map.size);
  w.layer(world.map.rock);
  w.layer(world.map.water);
  w.layer(world.map.energy);
  w.layer(world.map.biomass);
  w.layer(world.map.occupancy);

  const auto live = world.agents.live_slots();
  w.u32(world.agents.capacity());
  w.u64(world.agents.next_uid);
  w.u32(static_cast<std::uint32_t>(live.size()));
  for (auto slot : live) {
    const auto& a = world.agents[slot];
    w.u32(slot);
    w.i32(a.pos.x);
    w.i32(a.pos.y);
    w.u8(static_cast<std::uint8_t>(a.facing));
    w.f32(a.hp);
    w.u32(a.age);
    w.i32(a.store_water);
    w.i32(a.store_energy);
    w.i32(a.store_biomass);
    for (float c : a.color) w.f32(c);
    w.u64(a.uid);
    w.u64(a.parent);
    w.u64(a.birth_step);
  }
  w.u64(pool.stride());
  for (auto slot : live) {
    for (auto v : pool.weights(slot)) w.u16(v);
    w.f32(pool.log_temperature(slot));
  }
  w.i64(world.reference.biomass);
  w.i64(world.reference.water);
  w.u64(fnv1a64(w.bytes()));
  return std::move(w.bytes());
}

Snapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw SnapshotError("snapshot checksum mismatch (file too short)");
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.last(8));
  if (fnv1a64(body) != tail.u64()) throw SnapshotError("snapshot checksum mismatch");

  Reader r(body);
  for (auto b : kMagic) {
    if (r.u8() != b) throw SnapshotError("not a snapshot file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) {
    throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  }
  Snapshot snap;
  snap.config = parse_config(r.text());
  auto& world = snap.world;
  world.step = r.u64();
  world.seed = r.u64();
  world.map.size = r.i32();
  if (world.map.size != snap.config.grid_size) throw SnapshotError("grid size mismatch");
  const std::size_t cells = world.map.cell_count();
  world.map.rock = r.layer(cells);
  world.map.water = r.layer(cells);
  world.map.energy = r.layer(cells);
  world.map.biomass = r.layer(cells);
  world.map.occupancy = r.layer(cells);

  const std::uint32_t capacity = r.u32();
  world.agents = AgentTable(capacity);
  world.agents.next_uid = r.u64();
  const std::uint32_t live = r.u32();
  if (live > capacity) throw SnapshotError("more live agents than slots");
  std::vector<std::uint32_t> slots(live);
  for (auto& slot : slots) {
    slot = r.u32();
    if (slot >= capacity) throw SnapshotError("agent slot out of range");
    auto& a = world.agents[slot];
    a.alive = true;
    a.pos.x = r.i32();
    a.pos.y = r.i32();
    a.facing = static_cast<Orientation>(r.u8() & 3u);
    a.hp = r.f32();
    a.age = r.u32();
    a.store_water = r.i32();
    a.store_energy = r.i32();
    a.store_biomass = r.i32();
    for (float& c : a.color) c = r.f32();
    a.uid = r.u64();
    a.parent = r.u64();
    a.birth_step = r.u64();
  }
  world.agents.rebuild_free_list();

  snap.pool = PolicyPool(
      PolicyArch::make(snap.config.sensors, snap.config.attack_enabled, snap.config.policy.hidden_width),
      capacity);
  if (r.u64() != snap.pool.stride()) throw SnapshotError("policy shape mismatch");
  for (auto slot : slots) {
    for (auto& v : snap.pool.weights(slot)) v = r.u16();
    snap.pool.log_temperature(slot) = r.f32();
  }
  world.reference.biomass = r.i64();
  world.reference.water = r.i64();
  if (!r.at_end()) throw SnapshotError("trailing bytes in snapshot");
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const SimConfig& cfg,
                   const WorldState& world, const PolicyPool& pool) {
  const auto bytes = encode_snapshot(cfg, world, pool);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write snapshot " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing snapshot " + path.string());
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace ecosim
