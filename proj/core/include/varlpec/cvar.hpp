#pragma once

#include <span>
#include <vector>

#include "varlpec/scenario_model.hpp"

namespace varlpec {

struct CvarSolution {
  double cvar = 0.0;
  double m = 0.0;
  std::vector<double> x;
  std::vector<double> tau;
  int lp_iterations = 0;
};

// Global minimiser of CVaR_beta over X via the (m, x, tau) LP.
// Throws Error(kEmptyPolytope) when X is empty.
CvarSolution minimize_cvar(const Instance& inst);

// CVaR_beta(x) through the bounded-knapsack dual: losses sorted descending,
// weights filled up to their caps until they sum to one. Equal losses are
// filled in ascending scenario order.
double cvar_of(const Instance& inst, std::span<const double> x);

// The knapsack weights behind cvar_of().
std::vector<double> cvar_weights(const Instance& inst, std::span<const double> x);

// VaR_beta(x): least element of the CVaR argmin, from the LP
//   min m  s.t.  m + sum p_i tau_i / (1-beta) <= CVaR(x), tau >= 0,
//                tau_i >= x.y^i - m.
double var_of(const Instance& inst, std::span<const double> x);

// Largest element of the CVaR argmin (same LP, maximising m).
double var_upper_of(const Instance& inst, std::span<const double> x);

}  // namespace varlpec
