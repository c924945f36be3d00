#include <algorithm>
#include <cmath>
#include <limits>

#include "vpme/error.hpp"
#include "vpme/ot_solvers.hpp"

namespace vpme {

namespace {

// out_i = -reg * log sum_j exp((pot_j - C_ij) / reg + logw_j), C read with the given strides.
void soft_min(const std::vector<double>& cost, std::size_t rows, std::size_t cols, std::size_t row_stride,
              std::size_t col_stride, const std::vector<double>& pot, const std::vector<double>& logw, double reg,
              std::vector<double>& out, std::vector<double>& scratch) {
  scratch.resize(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols; ++j) {
      const double t = (pot[j] - cost[i * row_stride + j * col_stride]) / reg + logw[j];
      scratch[j] = t;
      mx = std::max(mx, t);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(scratch[j] - mx);
    out[i] = -reg * (mx + std::log(s));
  }
}

}  // namespace

SinkhornResult sinkhorn_log(const std::vector<double>& cost, const std::vector<double>& a, const std::vector<double>& b,
                            const SinkhornOptions& opts) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) throw InvalidArgument("sinkhorn: empty marginal");
  if (cost.size() != n * m) throw InvalidArgument("sinkhorn: cost matrix shape mismatch");
  if (!(opts.reg > 0.0)) throw InvalidArgument("sinkhorn: regularization must be positive");
  if (!(opts.relaxation >= 1.0 && opts.relaxation < 2.0)) throw InvalidArgument("sinkhorn: relaxation must lie in [1, 2)");
  for (double w : a)
    if (!(w > 0.0)) throw InvalidArgument("sinkhorn: weights must be positive");
  for (double w : b)
    if (!(w > 0.0)) throw InvalidArgument("sinkhorn: weights must be positive");

  std::vector<double> loga(n);
  std::vector<double> logb(m);
  for (std::size_t i = 0; i < n; ++i) loga[i] = std::log(a[i]);
  for (std::size_t j = 0; j < m; ++j) logb[j] = std::log(b[j]);

  SinkhornResult res;
  res.f.assign(n, 0.0);
  res.g.assign(m, 0.0);
  std::vector<double> scratch;

  auto row_error = [&](double reg) {
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += b[j] * std::exp((res.f[i] + res.g[j] - cost[i * m + j]) / reg);
      err += std::abs(a[i] * s - a[i]);
    }
    return err;
  };
  std::vector<double> f_old;
  std::vector<double> g_old;
  auto sweep = [&](double reg, double omega) {
    f_old = res.f;
    soft_min(cost, n, m, m, 1, res.g, logb, reg, res.f, scratch);
    if (omega != 1.0)
      for (std::size_t i = 0; i < n; ++i) res.f[i] = (1.0 - omega) * f_old[i] + omega * res.f[i];
    g_old = res.g;
    soft_min(cost, m, n, 1, m, res.f, loga, reg, res.g, scratch);
    if (omega != 1.0)
      for (std::size_t j = 0; j < m; ++j) res.g[j] = (1.0 - omega) * g_old[j] + omega * res.g[j];
    ++res.iterations;
  };

  if (opts.anneal) {
    const double cmax = *std::max_element(cost.begin(), cost.end());
    for (double reg = std::max(cmax, opts.reg); reg > opts.reg * 1.5; reg *= 0.5)
      for (int t = 0; t < 10; ++t) sweep(reg, 1.0);
  }
  res.marginal_error = std::numeric_limits<double>::infinity();
  double omega = opts.relaxation;
  while (res.iterations < opts.max_iterations) {
    sweep(opts.reg, omega);
    if (res.iterations % 10 == 0) {
      const double err = row_error(opts.reg);
      if (err > res.marginal_error) omega = 1.0;
      res.marginal_error = err;
      if (err <= opts.tolerance) break;
    }
  }
  if (res.marginal_error > opts.tolerance)
    throw SolverFailure("sinkhorn: marginal tolerance not reached", res.marginal_error,
                        static_cast<int>(res.iterations));

  for (std::size_t i = 0; i < n; ++i) res.dual_value += a[i] * res.f[i];
  for (std::size_t j = 0; j < m; ++j) res.dual_value += b[j] * res.g[j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost[i * m + j];
      res.transport_cost += a[i] * b[j] * std::exp((res.f[i] + res.g[j] - c) / opts.reg) * c;
    }
  return res;
}

}  // namespace vpme
