#include "vpme/pic.hpp"

#include <cmath>
#include <utility>

#include "vpme/error.hpp"

namespace vpme {
namespace {

// Visits every node within radius r of x with the unnormalized profile
// q = (1-s)^4 (1+4s), s = |node - x| / r, and its x-gradient factor
// w = 20 (1-s)^3 / r^2, so that grad_X q(node - X) = w (node - X).
// The constant c_d r^-d cancels in every per-particle ratio below.
template <class Visit>
void walk_kernel(const Vec& x, const TorusGrid& g, double r, Visit&& visit) {
  const double h = g.h();
  const int d = g.dim();
  const std::size_t n = static_cast<std::size_t>(g.n());
  const double inv_r2 = 1.0 / (r * r);
  int lo[3] = {0, 0, 0};
  int hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<int>(std::ceil((x[static_cast<std::size_t>(a)] - r) / h));
    hi[a] = static_cast<int>(std::floor((x[static_cast<std::size_t>(a)] + r) / h));
  }
  auto eval = [&](std::size_t flat, double dx0, double dx1, double dx2) {
    const double q2 = (dx0 * dx0 + dx1 * dx1 + dx2 * dx2) * inv_r2;
    if (q2 >= 1.0) return;
    const double s = std::sqrt(q2);
    const double t = 1.0 - s;
    const double t3 = t * t * t;
    visit(flat, t3 * t * (1.0 + 4.0 * s), 20.0 * t3 * inv_r2, dx0, dx1, dx2);
  };
  const int span = hi[d - 1] - lo[d - 1] + 1;
  int wrapped_last[64];
  const bool small = span <= 64;
  if (small)
    for (int k = 0; k < span; ++k) wrapped_last[k] = g.wrap(lo[d - 1] + k);
  auto last = [&](int k) { return static_cast<std::size_t>(small ? wrapped_last[k - lo[d - 1]] : g.wrap(k)); };
  if (d == 2) {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const double dx0 = i * h - x[0];
      const std::size_t row = static_cast<std::size_t>(g.wrap(i)) * n;
      for (int j = lo[1]; j <= hi[1]; ++j) eval(row + last(j), dx0, j * h - x[1], 0.0);
    }
  } else {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const double dx0 = i * h - x[0];
      const std::size_t plane = static_cast<std::size_t>(g.wrap(i)) * n;
      for (int j = lo[1]; j <= hi[1]; ++j) {
        const double dx1 = j * h - x[1];
        const std::size_t row = (plane + static_cast<std::size_t>(g.wrap(j))) * n;
        for (int k = lo[2]; k <= hi[2]; ++k) eval(row + last(k), dx0, dx1, k * h - x[2]);
      }
    }
  }
}

// Cloud-in-cell corners and weights of a wrapped position.
template <class Visit>
void cic_corners(const Vec& x, const TorusGrid& g, Visit&& visit) {
  const int d = g.dim();
  int base[3] = {0, 0, 0};
  double frac[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < d; ++a) {
    const double s = wrap_unit(x[static_cast<std::size_t>(a)]) * g.n();
    const double fl = std::floor(s);
    base[a] = static_cast<int>(fl);
    frac[a] = s - fl;
  }
  for (int c = 0; c < (1 << d); ++c) {
    double w = 1.0;
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
      const int bit = (c >> a) & 1;
      idx[a] = base[a] + bit;
      w *= bit ? frac[a] : 1.0 - frac[a];
    }
    if (w != 0.0) visit(g.index(idx[0], idx[1], idx[2]), w);
  }
}

void check_inputs(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m) {
  if (!(m.grid() == grid)) throw InvalidArgument("mollifier and grid disagree");
  if (m.radius() < 2.0 * grid.h()) throw InvalidArgument("mollifier under-resolved: r < 2h");
  if (e.dim != grid.dim()) throw InvalidArgument("ensemble and grid dimensions differ");
  if (e.size() == 0) throw InvalidArgument("empty ensemble");
}

}  // namespace

DepositionScheme parse_deposition_scheme(const std::string& name) {
  if (name == "kernel") return DepositionScheme::kernel;
  if (name == "cic_spectral") return DepositionScheme::cic_spectral;
  throw InvalidArgument("unknown deposition scheme '" + name + "'");
}

std::string to_string(DepositionScheme s) { return s == DepositionScheme::kernel ? "kernel" : "cic_spectral"; }

ScalarField deposit_mollified_density(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                      DepositionScheme scheme) {
  check_inputs(e, grid, m);
  const double inv_n = 1.0 / static_cast<double>(e.size());
  const double vol = grid.cell_volume();
  ScalarField rho(grid);

  if (scheme == DepositionScheme::cic_spectral) {
    const double w0 = inv_n / vol;
    for (const auto& x : e.positions) cic_corners(x, grid, [&](std::size_t f, double w) { rho.values[f] += w0 * w; });
    rho = mollify_field(rho, m);
  } else {
    std::vector<std::pair<std::size_t, double>> vals;
    for (const auto& x : e.positions) {
      vals.clear();
      double z = 0.0;
      walk_kernel(x, grid, m.radius(), [&](std::size_t f, double q, double, double, double, double) {
        vals.emplace_back(f, q);
        z += q;
      });
      const double scale = inv_n / (z * vol);
      for (const auto& [f, q] : vals) rho.values[f] += q * scale;
    }
  }
  for (double& v : rho.values)
    if (v < 0.0) v = 0.0;  // roundoff from the spectral convolution, |v| ~ 1e-16
  return rho;
}

std::vector<Vec> potential_forces(const ParticleEnsemble& e, const ScalarField& phi, const MollifierSpec& m,
                                  DepositionScheme scheme) {
  const auto& grid = phi.grid;
  check_inputs(e, grid, m);
  const int d = grid.dim();
  std::vector<Vec> out(e.size(), Vec{0.0, 0.0, 0.0});

  if (scheme == DepositionScheme::cic_spectral) {
    const auto field = mollify_field(gradient_field(phi), m);
    for (std::size_t i = 0; i < e.size(); ++i)
      cic_corners(e.positions[i], grid, [&](std::size_t f, double w) {
        for (int a = 0; a < d; ++a)
          out[i][static_cast<std::size_t>(a)] += w * field.components[static_cast<std::size_t>(a)][f];
      });
    return out;
  }

  // F = -grad_X [sum_g phi_g q(g - X) / sum_g q(g - X)], the gradient of the
  // particle's share of the discrete field energy.
  for (std::size_t i = 0; i < e.size(); ++i) {
    double z = 0.0;
    double phi_q = 0.0;
    double grad_z[3] = {0.0, 0.0, 0.0};
    double phi_grad[3] = {0.0, 0.0, 0.0};
    walk_kernel(e.positions[i], grid, m.radius(),
                [&](std::size_t f, double q, double w, double dx0, double dx1, double dx2) {
                  const double p = phi.values[f];
                  z += q;
                  phi_q += p * q;
                  grad_z[0] += w * dx0;
                  grad_z[1] += w * dx1;
                  grad_z[2] += w * dx2;
                  phi_grad[0] += p * w * dx0;
                  phi_grad[1] += p * w * dx1;
                  phi_grad[2] += p * w * dx2;
                });
    for (int a = 0; a < d; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      out[i][aa] = -(phi_grad[aa] / z - grad_z[aa] * phi_q / (z * z));
    }
  }
  return out;
}

ForceEvaluator::ForceEvaluator(const TorusGrid& grid, MollifierSpec m, double epsilon, DepositionScheme scheme,
                               NewtonOptions newton)
    : grid_(grid), m_(std::move(m)), epsilon_(epsilon), scheme_(scheme), newton_(newton) {
  if (!(epsilon > 0.0)) throw InvalidArgument("ForceEvaluator: epsilon must be positive");
  if (!(m_.grid() == grid)) throw InvalidArgument("ForceEvaluator: mollifier grid mismatch");
}

std::vector<Vec> ForceEvaluator::operator()(const ParticleEnsemble& e) {
  rho_ = deposit_mollified_density(e, grid_, m_, scheme_);
  auto sol = solve_potential(rho_, epsilon_, have_u_ ? &u_ : nullptr, newton_);
  u_ = std::move(sol.u);
  have_u_ = true;
  residual_ = sol.residual_max;
  iters_ = sol.newton_iters;
  return potential_forces(e, u_, m_, scheme_);
}

std::vector<Vec> compute_forces(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                DepositionScheme scheme) {
  ForceEvaluator eval(grid, m, e.epsilon, scheme);
  return eval(e);
}

std::vector<Vec> linearized_pair_forces(const ParticleEnsemble& e, const TorusGrid& grid, const MollifierSpec& m,
                                        DepositionScheme scheme) {
  const auto rho = deposit_mollified_density(e, grid, m, scheme);
  const auto u_bar = solve_linear_poisson(rho, e.epsilon);
  return potential_forces(e, u_bar, m, scheme);
}

LeapfrogIntegrator::LeapfrogIntegrator(ParticleEnsemble initial, ForceEvaluator forces)
    : state_(std::move(initial)), eval_(std::move(forces)) {
  state_.wrap_positions();
  accel_ = eval_(state_);
}

void LeapfrogIntegrator::reset(ParticleEnsemble e) {
  state_ = std::move(e);
  state_.wrap_positions();
  accel_ = eval_(state_);
}

void LeapfrogIntegrator::step(double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("leapfrog step: dt must be positive");
  ParticleEnsemble next = state_;
  const int d = next.dim;
  for (std::size_t i = 0; i < next.size(); ++i)
    for (int a = 0; a < d; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      next.velocities[i][aa] += 0.5 * dt * accel_[i][aa];
      next.positions[i][aa] = wrap_unit(next.positions[i][aa] + dt * next.velocities[i][aa]);
    }
  auto accel = eval_(next);
  for (std::size_t i = 0; i < next.size(); ++i)
    for (int a = 0; a < d; ++a) next.velocities[i][static_cast<std::size_t>(a)] += 0.5 * dt * accel[i][static_cast<std::size_t>(a)];
  next.time = state_.time + dt;
  state_ = std::move(next);
  accel_ = std::move(accel);
}

ParticleEnsemble leapfrog_step(const ParticleEnsemble& e, double dt, const TorusGrid& grid, const MollifierSpec& m,
                               DepositionScheme scheme) {
  LeapfrogIntegrator integ(e, ForceEvaluator(grid, m, e.epsilon, scheme));
  integ.step(dt);
  return integ.state();
}

}  // namespace vpme
