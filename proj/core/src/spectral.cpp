#include "vpme/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>

namespace vpme {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

const Spectral& Spectral::for_grid(const TorusGrid& grid) {
  static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
  std::lock_guard lock(planner_mutex());
  auto& slot = cache[{grid.dim(), grid.n()}];
  if (!slot) slot.reset(new Spectral(grid));
  return *slot;
}

Spectral::Spectral(const TorusGrid& grid) : grid_(grid) {
  const int n = grid.n();
  const int d = grid.dim();
  const int half = n / 2 + 1;
  modes_ = grid.cells() / static_cast<std::size_t>(n) * static_cast<std::size_t>(half);
  kvec_.assign(modes_ * 3, 0);
  k2_.assign(modes_, 0.0);
  weight_.assign(modes_, 0.0);

  auto signed_k = [n](int i) { return i <= n / 2 ? i : i - n; };
  std::size_t m = 0;
  const int outer = d == 2 ? 1 : n;
  for (int a = 0; a < outer; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < half; ++c, ++m) {
        int k[3] = {0, 0, 0};
        if (d == 2) {
          k[0] = signed_k(b);
          k[1] = c;
        } else {
          k[0] = signed_k(a);
          k[1] = signed_k(b);
          k[2] = c;
        }
        double s = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
          kvec_[m * 3 + static_cast<std::size_t>(ax)] = k[ax];
          s += static_cast<double>(k[ax]) * k[ax];
        }
        k2_[m] = s;
        weight_[m] = (c == 0 || c == n / 2) ? 1.0 : 2.0;
      }

  std::vector<int> dims(static_cast<std::size_t>(d), n);
  std::vector<double> rbuf(grid.cells());
  std::vector<Complex> cbuf(modes_);
  auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
  plan_fwd_ = fftw_plan_dft_r2c(d, dims.data(), rbuf.data(), cptr, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_inv_ = fftw_plan_dft_c2r(d, dims.data(), cptr, rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Spectral::~Spectral() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

bool Spectral::nyquist(std::size_t m, int axis) const noexcept {
  const int k = wavenumber(m, axis);
  return k == grid_.n() / 2 || k == -grid_.n() / 2;
}

std::vector<Complex> Spectral::forward(std::span<const double> values) const {
  std::vector<double> in(values.begin(), values.end());
  std::vector<Complex> out(modes_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> Spectral::inverse(std::span<const Complex> coeffs) const {
  std::vector<Complex> in(coeffs.begin(), coeffs.end());
  std::vector<double> out(grid_.cells());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(grid_.cells());
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> Spectral::laplacian(std::span<const double> values) const {
  auto c = forward(values);
  const double f = -4.0 * std::numbers::pi * std::numbers::pi;
  for (std::size_t m = 0; m < modes_; ++m) c[m] *= f * k2_[m];
  return inverse(c);
}

std::vector<double> Spectral::derivative(std::span<const double> values, int axis) const {
  auto c = forward(values);
  const double tp = 2.0 * std::numbers::pi;
  for (std::size_t m = 0; m < modes_; ++m) {
    if (nyquist(m, axis)) {
      c[m] = 0.0;
    } else {
      c[m] *= Complex(0.0, tp * wavenumber(m, axis));
    }
  }
  return inverse(c);
}

}  // namespace vpme
