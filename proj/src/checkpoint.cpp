#include "v2x/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "v2x/error.hpp"

namespace v2x {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', '2', 'X', 'C'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b, std::size_t end) : b_(b), end_(end) {}
  template <typename T>
  T get() {
    require(pos_ + sizeof(T) <= end_, ErrorKind::kFormatMismatch, "checkpoint: truncated");
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

void put_arch(Writer& w, const NetworkArchitecture& a) {
  w.put<std::int32_t>(a.vehicles);
  w.put<std::int32_t>(a.history);
  w.put<std::int32_t>(a.channels);
  w.put<std::int32_t>(a.extra_per_vehicle);
  w.put<std::int32_t>(a.conv.kernel);
  w.put<std::int32_t>(a.conv.filters);
  w.put<std::int32_t>(a.conv.stride);
  w.put<std::int32_t>(static_cast<std::int32_t>(a.hidden.size()));
  for (int h : a.hidden) w.put<std::int32_t>(h);
  w.put<std::int32_t>(a.outputs);
}

NetworkArchitecture get_arch(Reader& r) {
  NetworkArchitecture a;
  a.vehicles = r.get<std::int32_t>();
  a.history = r.get<std::int32_t>();
  a.channels = r.get<std::int32_t>();
  a.extra_per_vehicle = r.get<std::int32_t>();
  a.conv.kernel = r.get<std::int32_t>();
  a.conv.filters = r.get<std::int32_t>();
  a.conv.stride = r.get<std::int32_t>();
  const int n = r.get<std::int32_t>();
  require(n >= 0 && n < 64, ErrorKind::kFormatMismatch, "checkpoint: corrupt architecture");
  a.hidden.resize(n);
  for (int& h : a.hidden) h = r.get<std::int32_t>();
  a.outputs = r.get<std::int32_t>();
  try {
    a.validate();
  } catch (const Error&) {
    fail(ErrorKind::kFormatMismatch, "checkpoint: invalid architecture");
  }
  return a;
}

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  for (char c : kMagic) w.put<char>(c);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(ck.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ck.agents.size()));
  for (const auto& a : ck.agents) {
    require(a.actor.size() == a.actor_arch.param_count() &&
                a.critic.size() == a.critic_arch.param_count(),
            ErrorKind::kShapeMismatch, "checkpoint: parameters disagree with architecture");
    put_arch(w, a.actor_arch);
    put_arch(w, a.critic_arch);
    w.put<std::uint64_t>(a.actor.size());
    w.put<std::uint64_t>(a.critic.size());
  }
  for (const auto& a : ck.agents) {
    for (double x : a.actor) w.put<float>(static_cast<float>(x));
    for (double x : a.critic) w.put<float>(static_cast<float>(x));
  }
  w.put<std::uint64_t>(fnv1a64(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 4 + 4 + 8 + 4 + 8, ErrorKind::kFormatMismatch, "checkpoint: too short");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  require(stored == fnv1a64(bytes.data(), body), ErrorKind::kFormatMismatch,
          "checkpoint: checksum mismatch");
  Reader r(bytes, body);
  for (char c : kMagic)
    require(r.get<char>() == c, ErrorKind::kFormatMismatch, "checkpoint: bad magic");
  const auto version = r.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorKind::kFormatMismatch,
          "checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ck;
  ck.seed = r.get<std::uint64_t>();
  const auto n = r.get<std::uint32_t>();
  require(n < 4096, ErrorKind::kFormatMismatch, "checkpoint: corrupt agent count");
  ck.agents.resize(n);
  for (auto& a : ck.agents) {
    a.actor_arch = get_arch(r);
    a.critic_arch = get_arch(r);
    const auto na = r.get<std::uint64_t>();
    const auto nc = r.get<std::uint64_t>();
    require(na == a.actor_arch.param_count() && nc == a.critic_arch.param_count(),
            ErrorKind::kShapeMismatch, "checkpoint: layer shapes disagree with architecture");
    a.actor.resize(na);
    a.critic.resize(nc);
  }
  for (auto& a : ck.agents) {
    for (double& x : a.actor) x = r.get<float>();
    for (double& x : a.critic) x = r.get<float>();
    a.actor_acc.assign(a.actor.size(), 0.0);
    a.critic_acc.assign(a.critic.size(), 0.0);
  }
  require(r.pos() == body, ErrorKind::kFormatMismatch, "checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto bytes = serialize_checkpoint(ck);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

void check_compatible(const Checkpoint& ck, int rsus, const NetworkArchitecture& actor,
                      const NetworkArchitecture& critic) {
  require(static_cast<int>(ck.agents.size()) == rsus, ErrorKind::kShapeMismatch,
          "checkpoint: holds " + std::to_string(ck.agents.size()) + " agents, expected " +
              std::to_string(rsus));
  for (const auto& a : ck.agents)
    require(a.actor_arch == actor && a.critic_arch == critic, ErrorKind::kShapeMismatch,
            "checkpoint: architecture " + a.actor_arch.describe() + " does not match " +
                actor.describe());
}

}  // namespace v2x
