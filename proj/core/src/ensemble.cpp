#include "vpme/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "vpme/error.hpp"
#include "vpme/io_util.hpp"

namespace vpme {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (i > 0) {
    out += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return out;
}

std::size_t coprime_multiplier(std::size_t n) {
  if (n <= 2) return 1;
  auto a = static_cast<std::size_t>(0.6180339887498949 * static_cast<double>(n));
  a = std::max<std::size_t>(a, 1);
  while (std::gcd(a, n) != 1) ++a;
  return a;
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

void ParticleEnsemble::wrap_positions() noexcept {
  for (auto& x : positions)
    for (int a = 0; a < dim; ++a) x[static_cast<std::size_t>(a)] = wrap_unit(x[static_cast<std::size_t>(a)]);
}

double ParticleEnsemble::max_speed() const noexcept {
  double m = 0.0;
  for (const auto& v : velocities) m = std::max(m, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  return m;
}

void ParticleEnsemble::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("ensemble: dim must be 2 or 3");
  if (positions.empty()) throw InvalidArgument("ensemble: N must be >= 1");
  if (positions.size() != velocities.size()) throw InvalidArgument("ensemble: position/velocity count mismatch");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (int a = 0; a < dim; ++a) {
      const double x = positions[i][static_cast<std::size_t>(a)];
      if (!(x >= 0.0 && x < 1.0)) throw InvalidArgument("ensemble: position outside [0,1)");
      if (!std::isfinite(velocities[i][static_cast<std::size_t>(a)]))
        throw InvalidArgument("ensemble: non-finite velocity");
    }
}

ParticleEnsemble sample_iid(const DensitySpec& f0, std::size_t n, std::uint64_t seed) {
  f0.validate();
  if (n == 0) throw InvalidArgument("sample_iid: N must be >= 1");
  ParticleEnsemble e;
  e.dim = f0.dim;
  e.positions.assign(n, Vec{0.0, 0.0, 0.0});
  e.velocities.assign(n, Vec{0.0, 0.0, 0.0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    e.positions[i][0] = wrap_unit(f0.x1_quantile(rng.uniform()));
    for (int a = 1; a < f0.dim; ++a) e.positions[i][static_cast<std::size_t>(a)] = rng.uniform();
    for (int a = 0; a < f0.dim; ++a) e.velocities[i][static_cast<std::size_t>(a)] = f0.velocity_quantile(rng.uniform());
  }
  return e;
}

std::vector<std::size_t> lattice_counts(std::size_t n, int axes) {
  std::vector<std::size_t> primes;
  std::size_t m = n;
  for (std::size_t p = 2; p * p <= m; ++p)
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  if (m > 1) primes.push_back(m);
  std::sort(primes.rbegin(), primes.rend());
  std::vector<std::size_t> counts(static_cast<std::size_t>(axes), 1);
  for (std::size_t p : primes) *std::min_element(counts.begin(), counts.end()) *= p;
  std::sort(counts.rbegin(), counts.rend());
  return counts;
}

ParticleEnsemble quiet_start(const DensitySpec& f0, std::size_t n) {
  f0.validate();
  if (n == 0) throw InvalidArgument("quiet_start: N must be >= 1");
  const int d = f0.dim;
  ParticleEnsemble e;
  e.dim = d;
  e.positions.assign(n, Vec{0.0, 0.0, 0.0});
  e.velocities.assign(n, Vec{0.0, 0.0, 0.0});

  const auto counts = lattice_counts(n, d);
  const std::size_t mult = coprime_multiplier(n);
  static constexpr unsigned bases[3] = {2, 3, 5};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t c = counts[static_cast<std::size_t>(a)];
      const double u = (static_cast<double>(rem % c) + 0.5) / static_cast<double>(c);
      rem /= c;
      e.positions[i][static_cast<std::size_t>(a)] = a == 0 ? wrap_unit(f0.x1_quantile(u)) : u;
    }
    const std::size_t j = (i * mult) % n;
    for (int a = 0; a < d; ++a)
      e.velocities[i][static_cast<std::size_t>(a)] = f0.velocity_quantile(radical_inverse(j + 1, bases[a]));
  }
  return e;
}

void write_ensemble_binary(const std::filesystem::path& path, const ParticleEnsemble& e) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write("VPME", 4);
  io::put_u32(os, static_cast<std::uint32_t>(e.dim));
  io::put_u64(os, e.size());
  io::put_f64(os, e.epsilon);
  io::put_f64(os, e.r);
  io::put_f64(os, e.time);
  for (const auto& x : e.positions)
    for (int a = 0; a < e.dim; ++a) io::put_f64(os, x[static_cast<std::size_t>(a)]);
  for (const auto& v : e.velocities)
    for (int a = 0; a < e.dim; ++a) io::put_f64(os, v[static_cast<std::size_t>(a)]);
  if (!os) throw IoError("write failed: " + path.string());
}

ParticleEnsemble read_ensemble_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "VPME") throw IoError("not an ensemble file: " + path.string());
  ParticleEnsemble e;
  e.dim = static_cast<int>(io::get_u32(is));
  const auto n = io::get_u64(is);
  e.epsilon = io::get_f64(is);
  e.r = io::get_f64(is);
  e.time = io::get_f64(is);
  if (e.dim != 2 && e.dim != 3) throw IoError("bad dimension in " + path.string());
  e.positions.assign(n, Vec{0.0, 0.0, 0.0});
  e.velocities.assign(n, Vec{0.0, 0.0, 0.0});
  for (auto& x : e.positions)
    for (int a = 0; a < e.dim; ++a) x[static_cast<std::size_t>(a)] = io::get_f64(is);
  for (auto& v : e.velocities)
    for (int a = 0; a < e.dim; ++a) v[static_cast<std::size_t>(a)] = io::get_f64(is);
  if (!is) throw IoError("truncated ensemble file: " + path.string());
  return e;
}

void write_ensemble_csv(const std::filesystem::path& path, const ParticleEnsemble& e) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  for (int a = 0; a < e.dim; ++a) os << (a ? "," : "") << 'x' << a + 1;
  for (int a = 0; a < e.dim; ++a) os << ",v" << a + 1;
  os << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (int a = 0; a < e.dim; ++a) os << (a ? "," : "") << e.positions[i][static_cast<std::size_t>(a)];
    for (int a = 0; a < e.dim; ++a) os << ',' << e.velocities[i][static_cast<std::size_t>(a)];
    os << '\n';
  }
}

}  // namespace vpme
