#pragma once

#include <optional>
#include <span>
#include <vector>

#include "varlpec/scenario_model.hpp"

namespace varlpec {

// A candidate (m, x, tau, lambda) for the complementarity-constrained
// minimum-VaR program; s_i = m + tau_i - x.y^i is derived.
struct LpecPoint {
  double m = 0.0;
  std::vector<double> x;
  std::vector<double> tau;
  std::vector<double> lambda;

  std::vector<double> slack(const Instance& inst) const;
};

struct Residuals {
  double feasibility = 0.0;     // max violation of the linear constraints
  double complementarity = 0.0; // sum tau_i (cap_i - lambda_i) + lambda_i s_i
};

inline constexpr double kLpecTol = 1e-7;

Residuals residuals(const Instance& inst, const LpecPoint& pt);

inline bool is_feasible(const Residuals& r, double tol = kLpecTol) {
  return r.feasibility <= tol && r.complementarity <= tol;
}

// Index sets of the two complementarity pairs. For the tau pair
// (tau_i, cap_i - lambda_i): alpha = tau > 0, beta = both zero,
// gamma = cap gap > 0. For the lambda pair (lambda_i, s_i) likewise.
struct IndexClassification {
  std::vector<int> alpha_tau, beta_tau, gamma_tau;
  std::vector<int> alpha_lambda, beta_lambda, gamma_lambda;
  double tol = 1e-6;
};

inline constexpr double kClassifyTol = 1e-6;

// Values <= tol count as zero and >= 2 tol as positive. Anything inside
// (tol, 2 tol) throws Error(kAmbiguousClassification); a pair with both
// members positive throws Error(kNotComplementary).
IndexClassification classify(const Instance& inst, const LpecPoint& pt,
                             double tol = kClassifyTol);

// Completes (m, x, tau) with dual weights: cap on {s = 0, tau > 0}, zero on
// {s > 0}, and the leftover mass spread over {s = 0, tau = 0} by a
// feasibility LP that prefers lower scenario indices. Returns nullopt when
// no valid lambda exists.
std::optional<std::vector<double>> recover_lambda(const Instance& inst, double m,
                                                  std::span<const double> x,
                                                  std::span<const double> tau,
                                                  double tol = kClassifyTol);

// LPEC point at portfolio x with m = VaR_beta(x) snapped onto the nearest
// scenario loss, tau = (x.y - m)_+ and recovered lambda.
LpecPoint point_from_portfolio(const Instance& inst, std::span<const double> x);

// Same with a caller-supplied m (must lie in the CVaR argmin at x).
std::optional<LpecPoint> point_from(const Instance& inst, double m,
                                    std::span<const double> x);

struct LowerBoundWitness {
  double value = 0.0;     // min_j min_{x in X} x.y^j
  int scenario = -1;
  std::vector<double> x;  // minimiser for that scenario
  int lps_solved = 0;
};

// Bound below which no feasible m can go (k LPs).
LowerBoundWitness min_var_exists_check(const Instance& inst);

}  // namespace varlpec
