#include "pet/learn/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

namespace pet::learn {

namespace {

constexpr std::array<char, 4> kMagic{'P', 'E', 'T', 'C'};

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b;
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw CheckpointError("checkpoint: unexpected end of file");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

void put_dims(std::ostream& out, const std::vector<std::size_t>& dims) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
}

std::vector<std::size_t> get_dims(std::istream& in) {
  const auto n = get_le<std::uint32_t>(in);
  if (n < 2 || n > 64) throw CheckpointError("checkpoint: bad layer count");
  std::vector<std::size_t> dims(n);
  for (auto& d : dims) {
    d = get_le<std::uint32_t>(in);
    if (d == 0 || d > (1u << 20)) throw CheckpointError("checkpoint: bad layer width");
  }
  return dims;
}

void put_f64s(std::ostream& out, const std::vector<double>& v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(i < v.size() ? v[i] : 0.0));
  }
}

void get_f64s(std::istream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  for (auto& x : v) x = std::bit_cast<double>(get_le<std::uint64_t>(in));
}

}  // namespace

void write_checkpoint(std::ostream& out, const std::vector<PolicyParams>& agents) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(agents.size()));
  for (const auto& a : agents) {
    const auto layout = a.layout();
    put_dims(out, a.actor.dims());
    put_dims(out, a.critic.dims());
    put_dims(out, {layout.n_dim(), layout.gap_dim(), layout.p_dim()});
    put_le<std::uint64_t>(out, a.actor_opt.t);
    put_le<std::uint64_t>(out, a.critic_opt.t);
    const auto na = a.actor.param_count();
    const auto nc = a.critic.param_count();
    put_f64s(out, a.actor.params(), na);
    put_f64s(out, a.critic.params(), nc);
    put_f64s(out, a.actor_opt.m, na);
    put_f64s(out, a.actor_opt.v, na);
    put_f64s(out, a.critic_opt.m, nc);
    put_f64s(out, a.critic_opt.v, nc);
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

std::vector<PolicyParams> read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError("checkpoint: bad magic");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = get_le<std::uint32_t>(in);
  if (count == 0) throw CheckpointError("checkpoint: no agents");
  std::vector<PolicyParams> agents;
  agents.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    PolicyParams p;
    auto actor_dims = get_dims(in);
    auto critic_dims = get_dims(in);
    auto heads = get_dims(in);
    if (heads.size() != 3 || heads[2] != kProbabilitySteps || heads[0] != heads[1] + 1) {
      throw CheckpointError("checkpoint: bad head table");
    }
    p.n_max = static_cast<std::uint32_t>(heads[1]);
    if (actor_dims.back() != p.layout().total() || critic_dims.back() != 1 ||
        actor_dims.front() != critic_dims.front()) {
      throw CheckpointError("checkpoint: inconsistent network dimensions");
    }
    p.actor = Mlp(actor_dims);
    p.critic = Mlp(critic_dims);
    p.actor_opt.t = get_le<std::uint64_t>(in);
    p.critic_opt.t = get_le<std::uint64_t>(in);
    const auto na = p.actor.param_count();
    const auto nc = p.critic.param_count();
    get_f64s(in, p.actor.params(), na);
    get_f64s(in, p.critic.params(), nc);
    get_f64s(in, p.actor_opt.m, na);
    get_f64s(in, p.actor_opt.v, na);
    get_f64s(in, p.critic_opt.m, nc);
    get_f64s(in, p.critic_opt.v, nc);
    agents.push_back(std::move(p));
  }
  return agents;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<PolicyParams>& agents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, agents);
}

std::vector<PolicyParams> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace pet::learn
