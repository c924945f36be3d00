#include "vpme/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "vpme/error.hpp"
#include "vpme/spectral.hpp"

namespace vpme {

GrowthDiagnostics track_growth(const RunRecord& record, std::vector<double> windows) {
  if (record.snapshots.empty()) throw InvalidArgument("track_growth: empty record");
  for (const auto& s : record.snapshots)
    if (!s.ensemble) throw InvalidArgument("track_growth: record does not store ensembles");
  for (double w : windows)
    if (!(w > 0.0)) throw InvalidArgument("track_growth: windows must be positive");
  std::sort(windows.begin(), windows.end());

  GrowthDiagnostics g;
  g.windows = windows;
  double running = 0.0;
  for (const auto& s : record.snapshots) {
    g.times.push_back(s.time);
    g.support_radius.push_back(s.ensemble->max_speed());
    running = std::max(running, s.max_density);
    g.h_rho.push_back(running);
  }

  const auto& snaps = record.snapshots;
  g.h_eta.assign(windows.size(), 0.0);
  for (std::size_t a = 0; a < snaps.size(); ++a)
    for (std::size_t b = a + 1; b < snaps.size(); ++b) {
      const double gap = snaps[b].time - snaps[a].time;
      if (gap > windows.back() + 1e-12) break;
      const auto& va = snaps[a].ensemble->velocities;
      const auto& vb = snaps[b].ensemble->velocities;
      double inc = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i) {
        double s2 = 0.0;
        for (int k = 0; k < snaps[a].ensemble->dim; ++k) s2 += (vb[i][k] - va[i][k]) * (vb[i][k] - va[i][k]);
        inc = std::max(inc, std::sqrt(s2));
      }
      for (std::size_t w = 0; w < windows.size(); ++w)
        if (gap <= windows[w] + 1e-12) g.h_eta[w] = std::max(g.h_eta[w], inc);
    }
  return g;
}

double default_density_order(int dim) noexcept { return (dim + 2.0) / dim; }

double density_sup_and_lp(const ScalarField& rho, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("density norm: order must be >= 1");
  double mx = 0.0;
  double acc = 0.0;
  for (double x : rho.values) {
    if (x < -1e-12) throw InvalidArgument("density norm: negative density");
    const double y = std::max(x, 0.0);
    mx = std::max(mx, y);
    if (std::isfinite(p)) acc += std::pow(y, p);
  }
  if (!std::isfinite(p)) return mx;
  return std::pow(acc * rho.grid.cell_volume(), 1.0 / p);
}

AnalyticNormReport analytic_norm(const ScalarField& g, double delta, int k_max) {
  if (!(delta > 1.0)) throw InvalidArgument("analytic_norm: delta must exceed 1");
  if (k_max < 0) throw InvalidArgument("analytic_norm: K_max must be >= 0");
  const auto& sp = Spectral::for_grid(g.grid);
  const auto coeffs = sp.forward(g.values);
  const double norm = 1.0 / static_cast<double>(g.grid.cells());
  AnalyticNormReport r;
  r.delta = delta;
  r.k_max = k_max;
  for (std::size_t m = 0; m < sp.modes(); ++m) {
    int l1 = 0;
    for (int a = 0; a < g.grid.dim(); ++a) l1 += std::abs(sp.wavenumber(m, a));
    const double term = sp.weight(m) * std::abs(coeffs[m]) * norm * std::pow(delta, l1);
    (l1 <= k_max ? r.value : r.tail) += term;
  }
  return r;
}

std::string to_json(const EnergyReport& r) {
  nlohmann::ordered_json j;
  j["kinetic"] = r.kinetic;
  j["field"] = r.field;
  j["thermal"] = r.thermal;
  j["total"] = r.total;
  j["epsilon"] = r.epsilon;
  return j.dump();
}

std::string to_json(const GrowthDiagnostics& g) {
  nlohmann::ordered_json j;
  j["times"] = g.times;
  j["support_radius"] = g.support_radius;
  j["h_rho"] = g.h_rho;
  j["windows"] = g.windows;
  j["h_eta"] = g.h_eta;
  return j.dump();
}

std::string to_json(const AnalyticNormReport& r) {
  nlohmann::ordered_json j;
  j["delta"] = r.delta;
  j["k_max"] = r.k_max;
  j["value"] = r.value;
  j["tail"] = r.tail;
  j["lattice_norm"] = r.lattice_norm;
  return j.dump();
}

std::string to_json(const FieldNormReport& r) {
  nlohmann::ordered_json j;
  j["sup_u_bar"] = r.sup_u_bar;
  j["sup_u_hat"] = r.sup_u_hat;
  j["lipschitz_e_hat"] = r.lipschitz_e_hat;
  j["log_lipschitz_e_bar"] = r.log_lipschitz_e_bar;
  return j.dump();
}

}  // namespace vpme
