#pragma once

#include <cstddef>
#include <vector>

#include "vpme/transport.hpp"

namespace vpme {

/// Minimum-cost perfect matching for a dense row-major n x n cost matrix
/// (shortest augmenting paths with column and augmenting-row reduction).
/// Returns the column assigned to every row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

struct AuctionOptions {
  /// Stop once epsilon <= max(absolute_tolerance, relative_tolerance * mean assigned cost).
  double relative_tolerance = 1e-4;
  double absolute_tolerance = 1e-12;
  /// Epsilon shrink factor between scaling phases.
  double scaling = 6.0;
  std::size_t max_bids = 4'000'000'000ULL;
};

struct AuctionResult {
  std::vector<std::size_t> object_of;  ///< bidder -> object
  double mean_cost = 0.0;               ///< (1/rows) sum_i cost(i, object_of[i])
  /// Bound on mean_cost minus the optimum (the final epsilon).
  double error_bound = 0.0;
  std::size_t bids = 0;
  int phases = 0;
};

/// Forward auction with epsilon scaling assigning every row of `cost` (bidders)
/// to a column (object) so that each column receives rows/cols bidders.
/// Requires cols to divide rows.
AuctionResult auction_transport(const PairCost& cost, const AuctionOptions& opts = {});

struct SinkhornOptions {
  double reg = 1e-3;
  /// Target l1 marginal error.
  double tolerance = 1e-4;
  std::size_t max_iterations = 50000;
  /// Geometric annealing of the regularization from the cost scale down to reg.
  bool anneal = true;
  /// Over-relaxation factor in [1, 2) for the potential updates at the final reg;
  /// dropped to 1 as soon as the marginal error grows.
  double relaxation = 1.8;
};

struct SinkhornResult {
  double dual_value = 0.0;      ///< <a,f> + <b,g>
  double transport_cost = 0.0;  ///< <pi, C>
  double marginal_error = 0.0;
  std::size_t iterations = 0;
  std::vector<double> f;
  std::vector<double> g;
};

/// Log-domain Sinkhorn on a dense row-major cost. Throws SolverFailure carrying the
/// achieved marginal error when the iteration cap is hit.
SinkhornResult sinkhorn_log(const std::vector<double>& cost, const std::vector<double>& a, const std::vector<double>& b,
                            const SinkhornOptions& opts = {});

}  // namespace vpme
