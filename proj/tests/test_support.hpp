#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "varlpec/cvar.hpp"
#include "varlpec/lp.hpp"
#include "varlpec/scenario_model.hpp"

namespace varlpec::testing {

// Equiprobable-or-given scenarios on the unit simplex.
inline Instance simplex_instance(std::vector<std::vector<double>> losses,
                                 std::vector<double> probs, double beta) {
  Instance inst;
  inst.k = static_cast<int>(losses.size());
  inst.n = static_cast<int>(losses.front().size());
  inst.beta = beta;
  inst.probs = std::move(probs);
  inst.losses = std::move(losses);
  inst.polytope.eq.push_back({std::vector<double>(inst.n, 1.0), 1.0});
  inst.polytope.lower.assign(inst.n, 0.0);
  inst.polytope.upper.assign(inst.n, lp::kInfinity);
  return inst;
}

// One scenario, X = simplex in R^n. cap = 1 / (1 - beta) > 1.
inline Instance one_scenario(std::vector<double> y, double beta = 0.9) {
  return prepare(simplex_instance({std::move(y)}, {1.0}, beta));
}

inline double min_loss_on_simplex(const std::vector<double>& y) {
  return *std::min_element(y.begin(), y.end());
}

inline bool in_polytope(const Polytope& poly, const std::vector<double>& x, double tol = 1e-9) {
  auto dot = [&](const std::vector<double>& a) {
    return std::inner_product(a.begin(), a.end(), x.begin(), 0.0);
  };
  for (const PolyRow& r : poly.eq) {
    if (std::abs(dot(r.coeffs) - r.rhs) > tol) return false;
  }
  for (const PolyRow& r : poly.ineq) {
    if (dot(r.coeffs) > r.rhs + tol) return false;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!poly.lower.empty() && x[j] < poly.lower[j] - tol) return false;
    if (!poly.upper.empty() && x[j] > poly.upper[j] + tol) return false;
  }
  return true;
}

// Random point of a simplex-based X; falls back to the CVaR minimiser when
// rejection sampling keeps missing an extra half-space.
inline std::vector<double> random_point(const Instance& inst, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<double> x(inst.n);
    for (double& v : x) v = e(rng);
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    for (double& v : x) v /= s;
    if (in_polytope(inst.polytope, x)) return x;
  }
  return minimize_cvar(inst).x;
}

// Discrete beta-quantile: smallest loss whose cumulative mass reaches beta.
inline double quantile_oracle(const Instance& inst, const std::vector<double>& x) {
  const std::vector<double> l = inst.losses_at(x);
  double best = lp::kInfinity;
  for (int i = 0; i < inst.k; ++i) {
    double mass = 0.0;
    for (int j = 0; j < inst.k; ++j) {
      if (l[j] <= l[i]) mass += inst.probs[j];
    }
    if (mass >= inst.beta - 1e-12) best = std::min(best, l[i]);
  }
  return best;
}

// CVaR at fixed x through the primal LP min m + sum p_i tau_i / (1-beta).
inline double cvar_lp_oracle(const Instance& inst, const std::vector<double>& x) {
  lp::LpModel model;
  const int m = model.add_variable("m", -lp::kInfinity, lp::kInfinity, 1.0);
  for (int i = 0; i < inst.k; ++i) {
    const int t = model.add_variable("t", 0.0, lp::kInfinity, inst.cap(i));
    model.add_constraint(lp::LinearExpr{{m, 1.0}, {t, 1.0}}, lp::Relation::kGreaterEqual,
                         inst.loss(i, x));
  }
  return lp::solve_lp(model).objective;
}

}  // namespace varlpec::testing
