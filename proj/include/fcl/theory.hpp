#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fcl/losses.hpp"
#include "fcl/prob.hpp"

namespace fcl {

/// sum_y eta_y loss(q, e_y)
double pointwise_risk(const LossSpec& spec, const ProbVector& q, const ProbVector& eta);

struct MinimizerResult {
  ProbVector q_star = ProbVector::uniform(2);
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Some coordinate sits on the clamp floor.
  bool boundary = false;
  double kkt_residual = 0.0;
};

/// Coordinates of the minimizer are kept in [kMinimizerFloor, 1].
inline constexpr double kMinimizerFloor = 1e-12;

/// Minimizes pointwise_risk over the simplex.
///
/// The risk is separable (see SeparableRisk), so the KKT system reduces to
/// finding the multiplier mu with sum_k q_k(mu) = 1, where q_k(mu) solves
/// h_k'(q) = mu. Both levels are solved by safeguarded root finding. Throws
/// ValidationError for families without a convex risk.
MinimizerResult minimize_risk(const LossSpec& spec, const ProbVector& eta);

struct SigmaSpec {
  double gamma = 0.0;
  double lambda = 0.0;
};

/// (1 - q)^gamma - gamma q log(q) (1 - q)^(gamma - 1) - 2 lambda q, q in (0, 1).
double sigma_eval(const SigmaSpec& spec, double q);

/// Zero of sigma_eval by bisection on (1e-12, 1 - 1e-12). Throws
/// ValidationError when there is no sign change there (lambda = 0 puts the
/// root at q -> 1; gamma = 0 needs lambda > 1/2).
double sigma_root(const SigmaSpec& spec);

struct CurvePoint {
  double q = 0.0;
  double p_hat_star = 0.0;
};

/// Binary optimal prediction: for each class-0 probability q, the class-0
/// coordinate of minimize_risk(spec, (q, 1 - q)).
std::vector<CurvePoint> optimal_curve(const LossSpec& spec, std::span<const double> q_grid);

/// 0, step, 2 step, ..., 1 computed as i / n with n = round(1 / step).
std::vector<double> unit_grid(double step);

struct OcUcBound {
  double lhs = 0.0;       // |max p - max eta|
  double inf_norm = 0.0;  // ||p - eta||_inf
  double rhs_l2 = 0.0;    // ||p - eta||_2
  bool holds = false;       // lhs <= rhs_l2
  bool chain_holds = false; // lhs <= inf_norm <= rhs_l2
};

OcUcBound oc_uc_bound(const ProbVector& p_hat, const ProbVector& eta);

/// True iff the risk minimizer ranks the classes exactly as eta does.
/// eta must have distinct entries.
bool order_preservation_check(const LossSpec& spec, const ProbVector& eta);

}  // namespace fcl
