#include <cstdint>
#include <cstring>
#include <string>
#include <fstream>
#include <vector>

#include "gbwm/metarl/metarl.hpp"
#include "gbwm/util/errors.hpp"

namespace gbwm {

namespace {

constexpr char kMagic[8] = {'G', 'B', 'W', 'M', 'E', 'N', 'S', '\0'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

struct Writer {
  std::vector<unsigned char> buf;

  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    buf.insert(buf.end(), c, c + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }

  void matrix(const Eigen::MatrixXd& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void vector(const Eigen::VectorXd& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mlp(const Mlp& net) {
    u32(net.spec.sigmoid_head ? 1u : 0u);
    u32(static_cast<std::uint32_t>(net.spec.widths.size()));
    for (int w : net.spec.widths) u32(static_cast<std::uint32_t>(w));
    for (const auto& w : net.W) matrix(w);
    for (const auto& b : net.b) vector(b);
  }
  void adam(const AdamState& a) {
    i64(a.step);
    for (const auto& m : a.mW) matrix(m);
    for (const auto& m : a.vW) matrix(m);
    for (const auto& v : a.mb) vector(v);
    for (const auto& v : a.vb) vector(v);
  }
  void agent(const AgentNets& a) {
    mlp(a.actor);
    mlp(a.critic);
    adam(a.actor_opt);
    adam(a.critic_opt);
  }
};

struct Reader {
  const unsigned char* p;
  std::size_t left;

  void bytes(void* out, std::size_t n) {
    if (n > left) throw VersionError("checkpoint: truncated file");
    std::memcpy(out, p, n);
    p += n;
    left -= n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }

  Eigen::MatrixXd matrix() {
    const std::uint32_t r = u32(), c = u32();
    if (r > 100000 || c > 100000) throw VersionError("checkpoint: implausible matrix shape");
    Eigen::MatrixXd m(r, c);
    bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
  Eigen::VectorXd vector() {
    const std::uint32_t n = u32();
    if (n > 100000) throw VersionError("checkpoint: implausible vector size");
    Eigen::VectorXd v(n);
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    return v;
  }
  Mlp mlp() {
    Mlp net;
    net.spec.sigmoid_head = u32() != 0;
    const std::uint32_t nw = u32();
    if (nw < 2 || nw > 64) throw VersionError("checkpoint: implausible layer count");
    net.spec.widths.resize(nw);
    for (auto& w : net.spec.widths) w = static_cast<int>(u32());
    const int L = net.spec.layers();
    net.W.reserve(static_cast<std::size_t>(L));
    net.b.reserve(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      Eigen::MatrixXd w = matrix();
      if (w.rows() != net.spec.widths[static_cast<std::size_t>(l) + 1] ||
          w.cols() != net.spec.widths[static_cast<std::size_t>(l)])
        throw VersionError("checkpoint: weight shape does not match layer widths");
      net.W.push_back(std::move(w));
    }
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd b = vector();
      if (b.size() != net.spec.widths[static_cast<std::size_t>(l) + 1])
        throw VersionError("checkpoint: bias shape does not match layer widths");
      net.b.push_back(std::move(b));
    }
    return net;
  }
  AdamState adam(const Mlp& net) {
    AdamState a;
    a.step = i64();
    const std::size_t L = net.W.size();
    for (std::size_t l = 0; l < L; ++l) a.mW.push_back(matrix());
    for (std::size_t l = 0; l < L; ++l) a.vW.push_back(matrix());
    for (std::size_t l = 0; l < L; ++l) a.mb.push_back(vector());
    for (std::size_t l = 0; l < L; ++l) a.vb.push_back(vector());
    for (std::size_t l = 0; l < L; ++l) {
      if (a.mW[l].rows() != net.W[l].rows() || a.mW[l].cols() != net.W[l].cols() ||
          a.vW[l].rows() != net.W[l].rows() || a.vW[l].cols() != net.W[l].cols() ||
          a.mb[l].size() != net.b[l].size() || a.vb[l].size() != net.b[l].size())
        throw VersionError("checkpoint: optimizer state does not match network");
    }
    return a;
  }
  AgentNets agent() {
    AgentNets a;
    a.actor = mlp();
    a.critic = mlp();
    a.actor_opt = adam(a.actor);
    a.critic_opt = adam(a.critic);
    return a;
  }
};

void write_config(Writer& w, const PpoConfig& c) {
  w.f64(c.learning_rate);
  w.f64(c.clip);
  w.f64(c.discount);
  w.i64(c.epochs);
  w.i64(c.episodes_per_epoch);
  w.f64(c.rho_start);
  w.f64(c.rho_end);
  w.f64(c.a_thresh);
  w.i64(c.seeds);
  w.f64(c.jitter_lo);
  w.f64(c.jitter_hi);
  w.f64(c.explore_std_start);
  w.f64(c.explore_std_end);
  w.i64(c.minibatch);
  w.i64(c.update_passes);
  w.u32(c.zero_extrinsic ? 1u : 0u);
}

PpoConfig read_config(Reader& r) {
  PpoConfig c;
  c.learning_rate = r.f64();
  c.clip = r.f64();
  c.discount = r.f64();
  c.epochs = static_cast<int>(r.i64());
  c.episodes_per_epoch = static_cast<int>(r.i64());
  c.rho_start = r.f64();
  c.rho_end = r.f64();
  c.a_thresh = r.f64();
  c.seeds = static_cast<int>(r.i64());
  c.jitter_lo = r.f64();
  c.jitter_hi = r.f64();
  c.explore_std_start = r.f64();
  c.explore_std_end = r.f64();
  c.minibatch = static_cast<int>(r.i64());
  c.update_passes = static_cast<int>(r.i64());
  c.zero_extrinsic = r.u32() != 0;
  return c;
}

}  // namespace

void save_checkpoint(const PolicyEnsemble& ens, const std::string& path) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ens.input_dim));
  w.u64(ens.scenario_seed);
  w.u32(static_cast<std::uint32_t>(ens.epochs_done));
  write_config(w, ens.config);
  w.u32(static_cast<std::uint32_t>(ens.members.size()));
  for (const auto& m : ens.members) {
    w.u64(m.seed);
    w.agent(m.goal);
    w.agent(m.portfolio);
  }
  const std::uint64_t sum = fnv1a(w.buf.data(), w.buf.size());
  w.u64(sum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("checkpoint: cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.buf.data()),
            static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw InputError("checkpoint: write failed: " + path);
}

PolicyEnsemble load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("checkpoint: cannot open: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t))
    throw VersionError("checkpoint: truncated file");

  const std::size_t payload = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + payload, sizeof stored);
  if (fnv1a(buf.data(), payload) != stored)
    throw VersionError("checkpoint: checksum mismatch (corrupt file)");

  Reader r{buf.data(), payload};
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw VersionError("checkpoint: not an ensemble checkpoint");
  if (r.u32() != kVersion) throw VersionError("checkpoint: unsupported version");

  PolicyEnsemble ens;
  ens.input_dim = static_cast<int>(r.u32());
  ens.scenario_seed = r.u64();
  ens.epochs_done = static_cast<int>(r.u32());
  ens.config = read_config(r);
  const std::uint32_t n = r.u32();
  if (n == 0 || n > 64) throw VersionError("checkpoint: implausible member count");
  ens.members.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    EnsembleMember m;
    m.seed = r.u64();
    m.goal = r.agent();
    m.portfolio = r.agent();
    if (m.goal.actor.spec.input() != ens.input_dim)
      throw VersionError("checkpoint: member input width mismatch");
    ens.members.push_back(std::move(m));
  }
  if (r.left != 0) throw VersionError("checkpoint: trailing bytes");
  return ens;
}

}  // namespace gbwm
