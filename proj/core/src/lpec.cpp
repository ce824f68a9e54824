#include "varlpec/lpec.hpp"

#include <algorithm>
#include <cmath>

#include "varlpec/cvar.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LinearExpr;
using lp::LpModel;
using lp::Relation;

std::vector<double> LpecPoint::slack(const Instance& inst) const {
  std::vector<double> s(inst.k);
  for (int i = 0; i < inst.k; ++i) s[i] = m + tau[i] - inst.loss(i, x);
  return s;
}

namespace {

double polytope_violation(const Polytope& poly, std::span<const double> x) {
  double worst = 0.0;
  auto dot = [&](const std::vector<double>& a) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * x[j];
    return acc;
  };
  for (const PolyRow& row : poly.eq) {
    worst = std::max(worst, std::abs(dot(row.coeffs) - row.rhs));
  }
  for (const PolyRow& row : poly.ineq) {
    worst = std::max(worst, dot(row.coeffs) - row.rhs);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!poly.lower.empty()) worst = std::max(worst, poly.lower[j] - x[j]);
    if (!poly.upper.empty()) worst = std::max(worst, x[j] - poly.upper[j]);
  }
  return worst;
}

}  // namespace

Residuals residuals(const Instance& inst, const LpecPoint& pt) {
  if (static_cast<int>(pt.x.size()) != inst.n ||
      static_cast<int>(pt.tau.size()) != inst.k ||
      static_cast<int>(pt.lambda.size()) != inst.k) {
    throw Error(ErrorCode::kBadDimensions, "LPEC point dimensions do not match");
  }
  Residuals r;
  r.feasibility = polytope_violation(inst.polytope, pt.x);
  const std::vector<double> s = pt.slack(inst);
  double lambda_sum = 0.0;
  for (int i = 0; i < inst.k; ++i) {
    const double cap = inst.cap(i);
    r.feasibility = std::max({r.feasibility, -pt.tau[i], -pt.lambda[i],
                              pt.lambda[i] - cap, -s[i]});
    r.complementarity += pt.tau[i] * (cap - pt.lambda[i]) + pt.lambda[i] * s[i];
    lambda_sum += pt.lambda[i];
  }
  r.feasibility = std::max(r.feasibility, std::abs(lambda_sum - 1.0));
  return r;
}

namespace {

// -1: zero, +1: positive. Throws inside the ambiguity band.
int sign_class(double v, double tol, int index, const char* what) {
  if (v <= tol) return -1;
  if (v >= 2.0 * tol) return 1;
  throw Error(ErrorCode::kAmbiguousClassification,
              std::string(what) + " at scenario " + std::to_string(index + 1) +
                  " lies in the ambiguity band");
}

}  // namespace

IndexClassification classify(const Instance& inst, const LpecPoint& pt,
                             double tol) {
  IndexClassification out;
  out.tol = tol;
  const std::vector<double> s = pt.slack(inst);
  for (int i = 0; i < inst.k; ++i) {
    const int tau = sign_class(pt.tau[i], tol, i, "tau");
    const int gap = sign_class(inst.cap(i) - pt.lambda[i], tol, i, "cap - lambda");
    if (tau > 0 && gap > 0) {
      throw Error(ErrorCode::kNotComplementary,
                  "tau and cap - lambda both positive at scenario " +
                      std::to_string(i + 1));
    }
    if (tau > 0) {
      out.alpha_tau.push_back(i);
    } else if (gap > 0) {
      out.gamma_tau.push_back(i);
    } else {
      out.beta_tau.push_back(i);
    }

    const int lam = sign_class(pt.lambda[i], tol, i, "lambda");
    const int sl = sign_class(s[i], tol, i, "s");
    if (lam > 0 && sl > 0) {
      throw Error(ErrorCode::kNotComplementary,
                  "lambda and s both positive at scenario " + std::to_string(i + 1));
    }
    if (lam > 0) {
      out.alpha_lambda.push_back(i);
    } else if (sl > 0) {
      out.gamma_lambda.push_back(i);
    } else {
      out.beta_lambda.push_back(i);
    }
  }
  return out;
}

std::optional<std::vector<double>> recover_lambda(const Instance& inst, double m,
                                                  std::span<const double> x,
                                                  std::span<const double> tau,
                                                  double tol) {
  std::vector<double> lambda(inst.k, 0.0);
  std::vector<int> free_mass;
  double remaining = 1.0;
  for (int i = 0; i < inst.k; ++i) {
    const double s = m + tau[i] - inst.loss(i, x);
    if (s < -tol || tau[i] < -tol) return std::nullopt;
    if (s > tol) continue;
    if (tau[i] > tol) {
      lambda[i] = inst.cap(i);
      remaining -= lambda[i];
    } else {
      free_mass.push_back(i);
    }
  }
  if (remaining < -1e-9) return std::nullopt;
  if (free_mass.empty()) {
    if (std::abs(remaining) > 1e-9) return std::nullopt;
    return lambda;
  }
  LpModel model;
  LinearExpr total;
  std::vector<int> cols;
  for (std::size_t r = 0; r < free_mass.size(); ++r) {
    const int i = free_mass[r];
    cols.push_back(model.add_variable("lambda" + std::to_string(i + 1), 0.0,
                                      inst.cap(i), static_cast<double>(r)));
    total.add(cols.back(), 1.0);
  }
  model.add_constraint(total, Relation::kEqual, std::max(remaining, 0.0), "mass");
  const lp::LpSolution sol = lp::solve_lp(model);
  if (!sol.optimal()) return std::nullopt;
  for (std::size_t r = 0; r < free_mass.size(); ++r) {
    const int i = free_mass[r];
    lambda[i] = std::clamp(sol.x[cols[r]], 0.0, inst.cap(i));
  }
  return lambda;
}

std::optional<LpecPoint> point_from(const Instance& inst, double m,
                                    std::span<const double> x) {
  LpecPoint pt;
  pt.m = m;
  pt.x.assign(x.begin(), x.end());
  pt.tau.resize(inst.k);
  for (int i = 0; i < inst.k; ++i) pt.tau[i] = std::max(0.0, inst.loss(i, x) - m);
  auto lambda = recover_lambda(inst, m, pt.x, pt.tau);
  if (!lambda) return std::nullopt;
  pt.lambda = std::move(*lambda);
  return pt;
}

LpecPoint point_from_portfolio(const Instance& inst, std::span<const double> x) {
  double m = var_of(inst, x);
  // VaR of a discrete distribution is one of the scenario losses.
  double nearest = m;
  double best = kInfinity;
  for (int i = 0; i < inst.k; ++i) {
    const double d = std::abs(inst.loss(i, x) - m);
    if (d < best) {
      best = d;
      nearest = inst.loss(i, x);
    }
  }
  if (best <= 1e-7 * std::max(1.0, std::abs(m))) m = nearest;
  auto pt = point_from(inst, m, x);
  if (!pt) {
    throw Error(ErrorCode::kNumericalFailure,
                "could not recover dual weights at the VaR point");
  }
  return *pt;
}

LowerBoundWitness min_var_exists_check(const Instance& inst) {
  LpModel base;
  std::vector<int> x(inst.n);
  for (int j = 0; j < inst.n; ++j) x[j] = base.add_variable("x" + std::to_string(j + 1));
  add_polytope_rows(inst.polytope, x, base, false);
  LowerBoundWitness out;
  out.value = kInfinity;
  for (int i = 0; i < inst.k; ++i) {
    LpModel model = base;
    for (int j = 0; j < inst.n; ++j) model.set_cost(x[j], inst.losses[i][j]);
    const lp::LpSolution sol = lp::solve_lp(model);
    ++out.lps_solved;
    if (sol.status == lp::LpStatus::kInfeasible) {
      throw Error(ErrorCode::kEmptyPolytope, "X is empty");
    }
    if (sol.status == lp::LpStatus::kUnbounded) {
      throw Error(ErrorCode::kUnboundedPolytope, "scenario loss unbounded below on X");
    }
    if (sol.objective < out.value) {
      out.value = sol.objective;
      out.scenario = i;
      out.x.assign(sol.x.begin(), sol.x.begin() + inst.n);
    }
  }
  return out;
}

}  // namespace varlpec
