#pragma once

#include <span>
#include <vector>

#include "varlpec/scenario_model.hpp"

namespace varlpec {

enum class SmoothFn { kLogExp, kSqrtHyperbola };

const char* smooth_fn_name(SmoothFn fn);

struct SmoothKind {
  SmoothFn fn = SmoothFn::kSqrtHyperbola;
  double epsilon = 1e-3;

  // Uniform approximation constant: |t_+ - rho(t)| <= c * epsilon.
  double c() const;
};

double rho(const SmoothKind& kind, double t);
double rho_prime(const SmoothKind& kind, double t);
double rho_second(const SmoothKind& kind, double t);

struct SmoothedVarInfo {
  double m = 0.0;
  double residual = 0.0;  // |sum p_i rho'(x.y^i - m) - (1 - beta)|
  int bisection_steps = 0;
  int newton_steps = 0;
  int bracket_expansions = 0;
};

// Unique root m of sum_i p_i rho'(x.y^i - m) = 1 - beta.
SmoothedVarInfo smoothed_var_info(const Instance& inst, const SmoothKind& kind,
                                  std::span<const double> x);
double smoothed_var(const Instance& inst, const SmoothKind& kind, std::span<const double> x);

// sum p_i rho''(t_i) y^i / sum p_i rho''(t_i) with t_i = x.y^i - m.
// Throws Error(kDegenerateCurvature) when the denominator underflows.
std::vector<double> smoothed_var_grad(const Instance& inst, const SmoothKind& kind,
                                      std::span<const double> x);

struct SmoothOptions {
  SmoothFn fn = SmoothFn::kSqrtHyperbola;
  std::vector<double> schedule = {1e-1, 1e-2, 1e-3};
  int max_iterations = 5000;  // per stage
  double gap_tol = 1e-7;
};

struct SmoothStage {
  double epsilon = 0.0;
  double m = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SmoothResult {
  std::vector<double> x;
  double m = 0.0;              // smoothed VaR at the last epsilon
  std::vector<double> grad;
  int iterations = 0;          // summed over stages
  double stationarity = 0.0;   // Frank-Wolfe gap at the end
  bool converged = false;      // final gap <= gap_tol
  int lps_solved = 0;
  double var_exact = 0.0;      // var_of(x)
  double var_upper = 0.0;      // var_upper_of(x)
  bool singleton_argmin = false;
  std::vector<SmoothStage> stages;
};

// Frank-Wolfe with Armijo backtracking over X, one stage per schedule entry,
// each warm-started from the previous iterate.
SmoothResult smooth_minimize(const Instance& inst, std::span<const double> x0,
                             const SmoothOptions& options = {});

}  // namespace varlpec
