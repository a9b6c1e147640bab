#include "v2x/trace_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "v2x/error.hpp"

namespace v2x {

static_assert(std::endian::native == std::endian::little,
              "trace I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(ErrorKind::kIoFailure, "trace: truncated file");
  return value;
}

std::string shortest(float x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> serialize_channel_config(const ChannelConfig& c) {
  return {c.carrier_hz,         c.bandwidth_hz,         c.path_loss_exponent,
          c.tx_power_dbm,       static_cast<double>(c.antenna_elements),
          c.element_spacing,    c.noise_figure_db,      c.shadowing_std_db,
          c.reference_distance_m, c.element_gain_db,    c.cluster_persistence,
          c.lobe_spread_deg,    c.max_cluster_delay_ns, c.cluster_decay_ns,
          c.subpath_decay_ns,   c.pressure_mbar,        c.humidity_pct,
          c.temperature_c};
}

ChannelConfig deserialize_channel_config(const std::vector<double>& f) {
  require(f.size() == 18, ErrorKind::kFormatMismatch, "trace: unexpected channel config size");
  ChannelConfig c;
  c.carrier_hz = f[0];
  c.bandwidth_hz = f[1];
  c.path_loss_exponent = f[2];
  c.tx_power_dbm = f[3];
  c.antenna_elements = static_cast<int>(f[4]);
  c.element_spacing = f[5];
  c.noise_figure_db = f[6];
  c.shadowing_std_db = f[7];
  c.reference_distance_m = f[8];
  c.element_gain_db = f[9];
  c.cluster_persistence = f[10];
  c.lobe_spread_deg = f[11];
  c.max_cluster_delay_ns = f[12];
  c.cluster_decay_ns = f[13];
  c.subpath_decay_ns = f[14];
  c.pressure_mbar = f[15];
  c.humidity_pct = f[16];
  c.temperature_c = f[17];
  return c;
}

void write_trace(const std::filesystem::path& path, const ChannelTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out.write(kTraceMagic, 4);
  put<std::uint32_t>(out, kTraceFormatVersion);
  put<std::int32_t>(out, trace.rsus());
  put<std::int32_t>(out, trace.vehicles());
  put<std::int32_t>(out, trace.slots());
  put<std::int32_t>(out, trace.antennas());
  put<std::uint64_t>(out, trace.rng_seed());
  const auto fields = serialize_channel_config(trace.config());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fields.size()));
  for (double f : fields) put<double>(out, f);
  const auto& data = trace.raw();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(std::complex<float>)));
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "write failed: " + path.string());
}

ChannelTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIoFailure, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  require(in && std::memcmp(magic, kTraceMagic, 4) == 0, ErrorKind::kFormatMismatch,
          "trace: bad magic in " + path.string());
  const auto version = get<std::uint32_t>(in);
  require(version == kTraceFormatVersion, ErrorKind::kFormatMismatch,
          "trace: unsupported version " + std::to_string(version));
  const int B = get<std::int32_t>(in);
  const int V = get<std::int32_t>(in);
  const int T = get<std::int32_t>(in);
  const int N = get<std::int32_t>(in);
  const auto seed = get<std::uint64_t>(in);
  const auto n_fields = get<std::uint32_t>(in);
  require(n_fields < 1024, ErrorKind::kFormatMismatch, "trace: corrupt header");
  std::vector<double> fields(n_fields);
  for (auto& f : fields) f = get<double>(in);
  const ChannelConfig cfg = deserialize_channel_config(fields);
  require(cfg.antenna_elements == N, ErrorKind::kFormatMismatch,
          "trace: antenna count disagrees with config");
  ChannelTrace trace(B, V, T, seed, cfg);
  auto& data = trace.raw();
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(std::complex<float>)));
  require(static_cast<bool>(in), ErrorKind::kIoFailure, "trace: truncated payload");
  return trace;
}

void write_trace_metadata(const std::filesystem::path& path, const ChannelTrace& trace) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  const auto& c = trace.config();
  out << "format=V2XT\n"
      << "version=" << kTraceFormatVersion << "\n"
      << "rsus=" << trace.rsus() << "\n"
      << "vehicles=" << trace.vehicles() << "\n"
      << "slots=" << trace.slots() << "\n"
      << "antennas=" << trace.antennas() << "\n"
      << "rng_seed=" << trace.rng_seed() << "\n"
      << "record_order=t,b,v,antenna\n"
      << "record_type=complex64\n"
      << "channel.carrier_hz=" << c.carrier_hz << "\n"
      << "channel.bandwidth_hz=" << c.bandwidth_hz << "\n"
      << "channel.path_loss_exponent=" << c.path_loss_exponent << "\n"
      << "channel.tx_power_dbm=" << c.tx_power_dbm << "\n"
      << "channel.element_spacing=" << c.element_spacing << "\n"
      << "channel.noise_figure_db=" << c.noise_figure_db << "\n"
      << "channel.noise_power_dbm=" << c.noise_power_dbm() << "\n"
      << "channel.shadowing_std_db=" << c.shadowing_std_db << "\n"
      << "channel.element_gain_db=" << c.element_gain_db << "\n"
      << "channel.cluster_persistence=" << c.cluster_persistence << "\n"
      << "channel.pressure_mbar=" << c.pressure_mbar << "\n"
      << "channel.humidity_pct=" << c.humidity_pct << "\n"
      << "channel.temperature_c=" << c.temperature_c << "\n";
}

void write_trace_csv(const std::filesystem::path& path, const ChannelTrace& trace) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIoFailure, "cannot open " + path.string());
  out << "t,b,v,antenna_index,re,im\n";
  for (int t = 0; t < trace.slots(); ++t)
    for (int b = 0; b < trace.rsus(); ++b)
      for (int v = 0; v < trace.vehicles(); ++v) {
        const auto h = trace.channel(t, b, v);
        for (int n = 0; n < trace.antennas(); ++n)
          out << t << ',' << b << ',' << v << ',' << n << ',' << shortest(h[n].real()) << ','
              << shortest(h[n].imag()) << '\n';
      }
}

}  // namespace v2x
