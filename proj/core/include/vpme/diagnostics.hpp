#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vpme/energy.hpp"
#include "vpme/grid.hpp"
#include "vpme/poisson.hpp"
#include "vpme/simulate.hpp"

namespace vpme {

struct GrowthDiagnostics {
  std::vector<double> times;
  std::vector<double> support_radius;  ///< R_t, max particle speed
  std::vector<double> h_rho;           ///< running sup of the max deposited density
  std::vector<double> windows;         ///< Delta values, ascending
  std::vector<double> h_eta;           ///< max |V_i(t) - V_i(s)| over snapshot pairs with |t - s| <= Delta
};

/// Rejects records without stored ensembles and non-positive windows.
GrowthDiagnostics track_growth(const RunRecord& record, std::vector<double> windows);

/// (d+2)/d, the integrability order of the density for finite energy.
double default_density_order(int dim) noexcept;

/// Grid L^p norm of rho; p = infinity gives the maximum. Rejects negative values below -1e-12.
double density_sup_and_lp(const ScalarField& rho, double p);

struct AnalyticNormReport {
  double delta = 0.0;
  int k_max = 0;
  /// sum over |k|_1 <= k_max of |g_k| delta^|k|_1
  double value = 0.0;
  /// same sum over the remaining resolved modes
  double tail = 0.0;
  std::string lattice_norm = "l1";
};

/// Rejects delta <= 1 and k_max < 0.
AnalyticNormReport analytic_norm(const ScalarField& g, double delta, int k_max);

std::string to_json(const EnergyReport& r);
std::string to_json(const GrowthDiagnostics& g);
std::string to_json(const AnalyticNormReport& r);
std::string to_json(const FieldNormReport& r);

}  // namespace vpme
