#include "vpme/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vpme/error.hpp"
#include "vpme/spectral.hpp"

namespace vpme {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPi2 = 4.0 * std::numbers::pi * std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void check_density(const ScalarField& rho) {
  if (!rho.all_finite()) throw InvalidArgument("density contains non-finite values");
  if (std::abs(rho.mean() - 1.0) > 1e-9)
    throw InvalidArgument("density must have unit cell average (total mass 1)");
}

// (-eps^2 Lap + diag w) applied spectrally.
class NewtonOperator {
public:
  NewtonOperator(const Spectral& sp, double eps2, std::span<const double> w)
      : sp_(sp), eps2_(eps2), w_(w), wbar_(std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size())) {}

  std::vector<double> apply(std::span<const double> p) const {
    auto c = sp_.forward(p);
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= eps2_ * kFourPi2 * sp_.k2(m);
    auto out = sp_.inverse(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w_[i] * p[i];
    return out;
  }

  std::vector<double> precondition(std::span<const double> r) const {
    auto c = sp_.forward(r);
    for (std::size_t m = 0; m < c.size(); ++m) c[m] /= eps2_ * kFourPi2 * sp_.k2(m) + wbar_;
    return sp_.inverse(c);
  }

private:
  const Spectral& sp_;
  double eps2_;
  std::span<const double> w_;
  double wbar_;
};

// Preconditioned CG for A x = b until max|b - A x| <= tol.
std::vector<double> pcg(const NewtonOperator& op, std::span<const double> b, double tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  auto z = op.precondition(r);
  std::vector<double> p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    if (max_norm(r) <= tol) break;
    auto ap = op.apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    z = op.precondition(r);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return x;
}

struct StageResult {
  double residual;
  int iters;
  bool converged;
};

StageResult newton_stage(const Spectral& sp, std::vector<double>& u, std::span<const double> rho, double eps,
                         const NewtonOptions& opts) {
  const double eps2 = eps * eps;
  const std::size_t n = u.size();
  std::vector<double> w(n), f(n);
  auto eval = [&](const std::vector<double>& uu, std::vector<double>& ww, std::vector<double>& ff) {
    auto lap = sp.laplacian(uu);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ww[i] = std::exp(uu[i]);
      ff[i] = eps2 * lap[i] - ww[i] + rho[i];
      m = std::max(m, std::abs(ff[i]));
    }
    return m;
  };

  double res = eval(u, w, f);
  int iters = 0;
  std::vector<double> trial(n), w_trial(n), f_trial(n);
  while (res > opts.tolerance) {
    if (iters >= opts.max_iterations) return {res, iters, false};
    NewtonOperator op(sp, eps2, w);
    const double cg_tol = std::max(0.05 * opts.tolerance, std::min(1e-2, res) * res);
    const auto du = pcg(op, f, cg_tol, opts.cg_max_iterations);
    ++iters;

    double step = 1.0;
    bool accepted = false;
    while (step > 1e-12) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * du[i];
      const double res_trial = eval(trial, w_trial, f_trial);
      if (std::isfinite(res_trial) && res_trial < res) {
        u.swap(trial);
        w.swap(w_trial);
        f.swap(f_trial);
        res = res_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return {res, iters, false};
  }
  return {res, iters, true};
}

}  // namespace

ScalarField solve_linear_poisson(const ScalarField& rho, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("solve_linear_poisson: epsilon must be positive");
  check_density(rho);
  const auto& sp = Spectral::for_grid(rho.grid);
  auto c = sp.forward(rho.values);
  const double eps2 = epsilon * epsilon;
  c[0] = 0.0;
  for (std::size_t m = 1; m < c.size(); ++m) c[m] /= eps2 * kFourPi2 * sp.k2(m);
  ScalarField out(rho.grid, 0.0, true);
  out.values = sp.inverse(c);
  return out;
}

std::vector<double> nonlinear_residual(const ScalarField& u, const ScalarField& rho, double epsilon) {
  const auto& sp = Spectral::for_grid(u.grid);
  auto lap = sp.laplacian(u.values);
  const double eps2 = epsilon * epsilon;
  for (std::size_t i = 0; i < lap.size(); ++i) lap[i] = eps2 * lap[i] - std::exp(u.values[i]) + rho.values[i];
  return lap;
}

PotentialSolve solve_potential(const ScalarField& rho, double epsilon, const ScalarField* init,
                               const NewtonOptions& opts) {
  if (!(epsilon > 0.0)) throw InvalidArgument("solve_potential: epsilon must be positive");
  check_density(rho);
  if (init && !(init->grid == rho.grid)) throw InvalidArgument("solve_potential: initial guess on a different grid");
  const auto& sp = Spectral::for_grid(rho.grid);

  PotentialSolve out;
  std::vector<double> u;
  if (init != nullptr) {
    u = init->values;
    const auto st = newton_stage(sp, u, rho.values, epsilon, opts);
    out.newton_iters = st.iters;
    out.stages = 1;
    out.residual_max = st.residual;
    if (st.converged) {
      out.u = ScalarField(rho.grid);
      out.u.values = std::move(u);
      return out;
    }
    // fall through to a cold start
  }

  std::vector<double> eps_stages;
  if (opts.continuation && epsilon < 1.0) {
    for (int k = 0;; ++k) {
      const double e = std::max(epsilon, std::ldexp(1.0, -k));
      eps_stages.push_back(e);
      if (e == epsilon) break;
    }
  } else {
    eps_stages.push_back(epsilon);
  }

  u.assign(rho.grid.cells(), 0.0);
  for (double e : eps_stages) {
    const auto st = newton_stage(sp, u, rho.values, e, opts);
    out.newton_iters += st.iters;
    ++out.stages;
    out.residual_max = st.residual;
    if (!st.converged)
      throw SolverFailure("Newton iteration did not converge at eps = " + std::to_string(e), st.residual,
                          out.newton_iters);
  }
  out.u = ScalarField(rho.grid);
  out.u.values = std::move(u);
  return out;
}

FieldSolution solve_full_potential(const ScalarField& rho, double epsilon, const std::optional<ScalarField>& init,
                                   const NewtonOptions& opts) {
  FieldSolution sol;
  sol.epsilon = epsilon;
  sol.u_bar = solve_linear_poisson(rho, epsilon);
  auto ps = solve_potential(rho, epsilon, init ? &*init : nullptr, opts);
  sol.residual_max = ps.residual_max;
  sol.newton_iters = ps.newton_iters;
  sol.u_total = std::move(ps.u);
  sol.u_hat = ScalarField(rho.grid);
  for (std::size_t i = 0; i < rho.grid.cells(); ++i)
    sol.u_hat.values[i] = sol.u_total.values[i] - sol.u_bar.values[i];
  sol.e_field = gradient_field(sol.u_total);
  return sol;
}

VectorField gradient_field(const ScalarField& u) {
  if (!u.all_finite()) throw InvalidArgument("gradient_field: non-finite input");
  const auto& sp = Spectral::for_grid(u.grid);
  VectorField e(u.grid);
  const auto c = sp.forward(u.values);
  for (int a = 0; a < u.grid.dim(); ++a) {
    std::vector<Complex> ca(c.size());
    for (std::size_t m = 0; m < c.size(); ++m)
      ca[m] = sp.nyquist(m, a) ? Complex(0.0) : c[m] * Complex(0.0, -kTwoPi * sp.wavenumber(m, a));
    e.components[static_cast<std::size_t>(a)] = sp.inverse(ca);
  }
  return e;
}

std::vector<Vec> evaluate_field_at(const VectorField& e, std::span<const Vec> positions) {
  const auto& g = e.grid;
  const int d = g.dim();
  const double n = g.n();
  std::vector<Vec> out(positions.size(), Vec{0.0, 0.0, 0.0});
  for (std::size_t p = 0; p < positions.size(); ++p) {
    int base[3] = {0, 0, 0};
    double frac[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      const double s = wrap_unit(positions[p][static_cast<std::size_t>(a)]) * n;
      const double fl = std::floor(s);
      base[a] = static_cast<int>(fl);
      frac[a] = s - fl;
    }
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
      double wgt = 1.0;
      int idx[3] = {0, 0, 0};
      for (int a = 0; a < d; ++a) {
        const int bit = (c >> a) & 1;
        idx[a] = base[a] + bit;
        wgt *= bit ? frac[a] : 1.0 - frac[a];
      }
      if (wgt == 0.0) continue;
      const std::size_t f = g.index(idx[0], idx[1], idx[2]);
      for (int a = 0; a < d; ++a) out[p][static_cast<std::size_t>(a)] += wgt * e.components[static_cast<std::size_t>(a)][f];
    }
  }
  return out;
}

FieldNormReport field_norm_report(const FieldSolution& sol) {
  FieldNormReport rep;
  rep.sup_u_bar = sol.u_bar.max_abs();
  rep.sup_u_hat = sol.u_hat.max_abs();
  const auto& g = sol.u_total.grid;
  const int d = g.dim();
  const auto e_bar = gradient_field(sol.u_bar);
  const auto e_hat = gradient_field(sol.u_hat);
  const double h = g.h();
  const double log_weight = h * (1.0 + std::log(std::sqrt(static_cast<double>(d)) / h));

  double max_bar = 0.0;
  double max_hat = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const auto ijk = g.coords(c);
    for (int a = 0; a < d; ++a) {
      auto nb = ijk;
      nb[static_cast<std::size_t>(a)] += 1;
      const std::size_t c2 = g.index(nb[0], nb[1], nb[2]);
      double db = 0.0;
      double dh = 0.0;
      for (int b = 0; b < d; ++b) {
        const auto bb = static_cast<std::size_t>(b);
        const double x = e_bar.components[bb][c2] - e_bar.components[bb][c];
        const double y = e_hat.components[bb][c2] - e_hat.components[bb][c];
        db += x * x;
        dh += y * y;
      }
      max_bar = std::max(max_bar, std::sqrt(db));
      max_hat = std::max(max_hat, std::sqrt(dh));
    }
  }
  rep.lipschitz_e_hat = max_hat / h;
  rep.log_lipschitz_e_bar = max_bar / log_weight;
  return rep;
}

}  // namespace vpme
