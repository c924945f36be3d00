#pragma once

#include <cstddef>
#include <string>

#include "vpme/density.hpp"
#include "vpme/ensemble.hpp"
#include "vpme/ot_solvers.hpp"
#include "vpme/transport.hpp"

namespace vpme {

/// Largest size handled by the dense exact solver.
inline constexpr std::size_t kExactSizeLimit = 4096;

struct DistanceResult {
  double distance = 0.0;  ///< W_p
  TransportPlan plan;
};

/// Exact W_p between equal-size uniform clouds (N <= kExactSizeLimit).
DistanceResult wasserstein_exact(const Cloud& a, const Cloud& b, const MetricSpec& spec);

struct AuctionDistance {
  double distance = 0.0;
  /// Additive bound on the error of distance^p.
  double error_bound = 0.0;
  std::size_t bids = 0;
  TransportPlan plan;
};

/// W_p between uniform clouds whose sizes divide one another, by epsilon-scaling auction.
AuctionDistance wasserstein_auction(const Cloud& a, const Cloud& b, const MetricSpec& spec,
                                    const AuctionOptions& opts = {});

struct EntropicResult {
  double distance = 0.0;    ///< debiased divergence^(1/p)
  double divergence = 0.0;  ///< OT(a,b) - OT(a,a)/2 - OT(b,b)/2, clamped at 0
  double reg = 0.0;
  std::size_t iterations = 0;
  double marginal_error = 0.0;
};

/// Debiased Sinkhorn estimate of W_p for weighted clouds.
EntropicResult wasserstein_entropic(const Cloud& a, const Cloud& b, const MetricSpec& spec, double reg = 1e-3,
                                    double tol = 1e-4);

/// Picks the exact solver for equal sizes, the auction for divisible sizes and
/// Sinkhorn otherwise. `method` receives "exact", "auction" or "entropic".
double wasserstein(const Cloud& a, const Cloud& b, const MetricSpec& spec, std::string* method = nullptr);

/// Deterministic quadrature cloud for f0 with its own resolution estimate.
struct QuadratureReference {
  DensitySpec f0;
  Cloud cloud;
  /// W_p between this cloud and the quiet start of four times the size; 0 when not estimated.
  double r_quad = 0.0;
};

QuadratureReference make_quadrature(const DensitySpec& f0, std::size_t m, const MetricSpec& spec,
                                    bool estimate_floor = true);

struct SemiDiscreteResult {
  double distance = 0.0;
  double r_quad = 0.0;
  std::size_t quadrature_size = 0;
  std::string method;
};

/// Distance from f0 to the ensemble through a quadrature cloud of size m >= 4N.
SemiDiscreteResult semi_discrete_distance(const DensitySpec& f0, const ParticleEnsemble& e, const MetricSpec& spec,
                                          std::size_t m);
SemiDiscreteResult semi_discrete_distance(const QuadratureReference& q, const ParticleEnsemble& e,
                                          const MetricSpec& spec);

/// sum pi_ij (lambda^2 |dx|^2 + |dv|^2) over the plan's entries.
double anisotropic_D(const TransportPlan& plan, double lambda);

/// Velocity scaling v -> v / R.
Cloud scale_velocities(const Cloud& c, double R);
ParticleEnsemble scale_velocities(const ParticleEnsemble& e, double R);

/// Replaces every atom by equal-weight copies translated by the given offsets.
Cloud mollify_cloud(const Cloud& c, const std::vector<Vec>& offsets);

enum class TailMode { moment, compact };

/// Parameters of the concentration bound P(W_p^p(nu^N, nu) >= x) <= a 1{x<=1} + b.
struct TailParams {
  int m = 4;  ///< ambient dimension
  int p = 2;
  double k = 6.0;  ///< moment order, k > 2p
  double alpha = 1.0;
  double c = 1.0;
  double C = 1.0;
  TailMode mode = TailMode::moment;
};

struct TailBound {
  double a = 0.0;
  double b = 0.0;
  /// a(N,x) 1{x <= 1} + b(N,x)
  double bound = 0.0;
};

TailBound fg_tail(double n, double x, const TailParams& params);

}  // namespace vpme
