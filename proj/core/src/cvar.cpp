#include "varlpec/cvar.hpp"

#include <algorithm>
#include <numeric>

namespace varlpec {

using lp::kInfinity;
using lp::LinearExpr;
using lp::LpModel;
using lp::LpStatus;
using lp::Relation;

CvarSolution minimize_cvar(const Instance& inst) {
  LpModel model;
  const int m = model.add_variable("m", -kInfinity, kInfinity, 1.0);
  std::vector<int> x(inst.n);
  for (int j = 0; j < inst.n; ++j) {
    x[j] = model.add_variable("x" + std::to_string(j + 1), -kInfinity, kInfinity);
  }
  std::vector<int> tau(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    tau[i] = model.add_variable("tau" + std::to_string(i + 1), 0.0, kInfinity,
                                inst.cap(i));
  }
  add_polytope_rows(inst.polytope, x, model, false);
  for (int i = 0; i < inst.k; ++i) {
    // tau_i + m - x.y^i >= 0
    LinearExpr e{{tau[i], 1.0}, {m, 1.0}};
    for (int j = 0; j < inst.n; ++j) e.add(x[j], -inst.losses[i][j]);
    model.add_constraint(e, Relation::kGreaterEqual, 0.0, "s" + std::to_string(i + 1));
  }
  const lp::LpSolution sol = lp::solve_lp(model);
  if (sol.status == LpStatus::kInfeasible) {
    throw Error(ErrorCode::kEmptyPolytope, "CVaR LP is infeasible: X is empty");
  }
  if (sol.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kUnboundedPolytope, "CVaR LP is unbounded");
  }
  CvarSolution out;
  out.cvar = sol.objective;
  out.m = sol.x[m];
  for (int j : x) out.x.push_back(sol.x[j]);
  for (int t : tau) out.tau.push_back(sol.x[t]);
  out.lp_iterations = sol.iterations;
  return out;
}

std::vector<double> cvar_weights(const Instance& inst, std::span<const double> x) {
  const std::vector<double> loss = inst.losses_at(x);
  std::vector<int> order(inst.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return loss[a] > loss[b]; });
  std::vector<double> weight(inst.k, 0.0);
  double remaining = 1.0;
  for (int i : order) {
    if (remaining <= 0.0) break;
    const double w = std::min(inst.cap(i), remaining);
    weight[i] = w;
    remaining -= w;
  }
  return weight;
}

double cvar_of(const Instance& inst, std::span<const double> x) {
  const std::vector<double> loss = inst.losses_at(x);
  const std::vector<double> weight = cvar_weights(inst, x);
  double value = 0.0;
  for (int i = 0; i < inst.k; ++i) value += weight[i] * loss[i];
  return value;
}

namespace {

double argmin_extreme(const Instance& inst, std::span<const double> x,
                      double direction) {
  const std::vector<double> loss = inst.losses_at(x);
  const double cvar = cvar_of(inst, x);
  LpModel model;
  const int m = model.add_variable("m", -kInfinity, kInfinity, direction);
  LinearExpr budget{{m, 1.0}};
  std::vector<int> tau(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    tau[i] = model.add_variable("tau" + std::to_string(i + 1), 0.0, kInfinity);
    budget.add(tau[i], inst.cap(i));
    model.add_constraint(LinearExpr{{tau[i], 1.0}, {m, 1.0}},
                         Relation::kGreaterEqual, loss[i]);
  }
  model.add_constraint(budget, Relation::kLessEqual, cvar, "cvar");
  const lp::LpSolution sol = lp::solve_lp(model);
  if (!sol.optimal()) {
    throw Error(ErrorCode::kNumericalFailure,
                std::string("least-element LP returned ") + lp::status_name(sol.status));
  }
  return sol.x[m];
}

}  // namespace

double var_of(const Instance& inst, std::span<const double> x) {
  return argmin_extreme(inst, x, 1.0);
}

double var_upper_of(const Instance& inst, std::span<const double> x) {
  return argmin_extreme(inst, x, -1.0);
}

}  // namespace varlpec
