#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "vpme/ensemble.hpp"
#include "vpme/grid.hpp"

namespace vpme {

/// Ground cost on T^d x R^d: (lambda^2 |dx|_T^2 + |dv|^2)^(p/2).
struct MetricSpec {
  int p = 2;
  double lambda = 1.0;
  void validate() const;
};

/// Weighted phase-space point cloud; empty `weights` means uniform 1/size.
struct Cloud {
  int dim = 2;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<double> weights;

  std::size_t size() const noexcept { return x.size(); }
  bool uniform() const noexcept { return weights.empty(); }
  double weight(std::size_t i) const noexcept {
    return weights.empty() ? 1.0 / static_cast<double>(x.size()) : weights[i];
  }
  /// Sizes agree, positions in [0,1)^d, weights nonnegative with unit sum (1e-9).
  void validate() const;
};

Cloud to_cloud(const ParticleEnsemble& e);
/// Copy of c with all velocities zeroed (the position marginal).
Cloud position_marginal(const Cloud& c);

/// Cost of transporting (x1, v1) to (x2, v2).
double phase_space_cost(const Vec& x1, const Vec& v1, const Vec& x2, const Vec& v2, int dim, const MetricSpec& spec);

/// Pairwise cost between two clouds with packed coordinates for fast repeated evaluation.
class PairCost {
public:
  PairCost(const Cloud& a, const Cloud& b, const MetricSpec& spec);

  std::size_t rows() const noexcept { return na_; }
  std::size_t cols() const noexcept { return nb_; }

  double operator()(std::size_t i, std::size_t j) const noexcept {
    const double* za = &a_[i * stride_];
    const double* zb = &b_[j * stride_];
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) {
      double dx = std::abs(za[k] - zb[k]);
      dx = std::min(dx, 1.0 - dx);
      s += lambda2_ * dx * dx;
    }
    for (int k = dim_; k < 2 * dim_; ++k) {
      const double dv = za[k] - zb[k];
      s += dv * dv;
    }
    return p_ == 2 ? s : std::sqrt(s);
  }

  /// Costs from row i to every column, written to out[0, cols()).
  void row(std::size_t i, double* out) const noexcept;

  /// Row-major rows() x cols() matrix.
  std::vector<double> dense() const;

private:
  int dim_;
  std::size_t stride_;
  std::size_t na_;
  std::size_t nb_;
  double lambda2_;
  int p_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> b_soa_;  ///< coordinate-major copy of b_ for row()
};

struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
  double cost = 0.0;
};

/// Coupling between `source` and `target`, stored sparsely.
struct TransportPlan {
  Cloud source;
  Cloud target;
  MetricSpec metric;
  std::vector<PlanEntry> entries;
  double total_cost = 0.0;  ///< sum of weight * cost, i.e. W_p^p for an optimal plan
  /// Row -> column pairing for equal-size uniform clouds; empty otherwise.
  std::vector<std::size_t> permutation;

  /// Max absolute deviation of either marginal from the cloud weights.
  double marginal_error() const;
  /// Sum of weight * cost with costs recomputed from the clouds.
  double recomputed_cost() const;
  /// Throws InvalidArgument when marginals or cost are off by more than tol.
  void validate(double tol = 1e-9) const;
};

/// Sparse CSV with header `i,j,weight,cost`.
void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan);

}  // namespace vpme
