#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vpme/grid.hpp"

namespace vpme {

/// Potentials and field of one electrostatic solve, U = Ubar + Uhat.
struct FieldSolution {
  ScalarField u_bar;    ///< mean-zero solution of eps^2 Lap Ubar = 1 - rho
  ScalarField u_hat;    ///< nonlinear remainder U - Ubar
  ScalarField u_total;  ///< solution of eps^2 Lap U = e^U - rho
  VectorField e_field;  ///< E = -grad U
  double epsilon = 1.0;
  double residual_max = 0.0;
  int newton_iters = 0;
  double time = 0.0;
};

struct NewtonOptions {
  double tolerance = 1e-10;   ///< max-norm of eps^2 Lap U - e^U + rho
  int max_iterations = 50;    ///< per continuation stage
  int cg_max_iterations = 500;
  bool continuation = true;   ///< cold starts below eps = 1 walk eps_k = max(eps, 2^-k)
};

/// Result of the bare nonlinear solve.
struct PotentialSolve {
  ScalarField u;
  double residual_max = 0.0;
  int newton_iters = 0;
  int stages = 0;
};

/// Mean-zero Ubar with eps^2 Lap Ubar = 1 - rho, by Fourier inversion.
/// Rejects rho without unit cell average and eps <= 0.
ScalarField solve_linear_poisson(const ScalarField& rho, double epsilon);

/// Damped Newton solve of eps^2 Lap U = e^U - rho.
///
/// Each step solves (eps^2 Lap - diag e^U) dU = -F with conjugate gradients
/// preconditioned by the spectral inverse of (eps^2 Lap - <e^U>); the step is
/// halved until the residual max-norm strictly decreases. Throws
/// SolverFailure carrying the last residual when a stage hits its cap.
PotentialSolve solve_potential(const ScalarField& rho, double epsilon,
                               const ScalarField* init = nullptr,
                               const NewtonOptions& opts = {});

/// Full solve including the Ubar/Uhat split and the field E = -grad U.
FieldSolution solve_full_potential(const ScalarField& rho, double epsilon,
                                   const std::optional<ScalarField>& init = std::nullopt,
                                   const NewtonOptions& opts = {});

/// Pointwise residual eps^2 Lap U - e^U + rho.
std::vector<double> nonlinear_residual(const ScalarField& u, const ScalarField& rho, double epsilon);

/// E = -grad u by spectral differentiation.
VectorField gradient_field(const ScalarField& u);

/// Multilinear (cloud-in-cell) interpolation of e at wrapped positions.
std::vector<Vec> evaluate_field_at(const VectorField& e, std::span<const Vec> positions);

struct FieldNormReport {
  double sup_u_bar = 0.0;
  double sup_u_hat = 0.0;
  double lipschitz_e_hat = 0.0;     ///< max |Ehat(x)-Ehat(y)|/|x-y| over neighbouring nodes
  double log_lipschitz_e_bar = 0.0; ///< same with |x-y|(1 + log(sqrt(d)/|x-y|)) in the denominator
};

FieldNormReport field_norm_report(const FieldSolution& sol);

}  // namespace vpme
