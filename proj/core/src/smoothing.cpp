#include "varlpec/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "varlpec/cvar.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LpModel;

const char* smooth_fn_name(SmoothFn fn) {
  return fn == SmoothFn::kLogExp ? "logexp" : "sqrt";
}

double SmoothKind::c() const { return fn == SmoothFn::kLogExp ? std::log(2.0) : 1.0; }

double rho(const SmoothKind& k, double t) {
  const double e = k.epsilon;
  if (k.fn == SmoothFn::kLogExp) {
    const double u = t / e;
    return u > 0 ? t + e * std::log1p(std::exp(-u)) : e * std::log1p(std::exp(u));
  }
  const double r = std::hypot(t, 2.0 * e);
  return t >= 0 ? 0.5 * (r + t) : 2.0 * e * e / (r - t);
}

double rho_prime(const SmoothKind& k, double t) {
  const double e = k.epsilon;
  if (k.fn == SmoothFn::kLogExp) {
    const double u = t / e;
    if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
    const double w = std::exp(u);
    return w / (1.0 + w);
  }
  const double r = std::hypot(t, 2.0 * e);
  return t >= 0 ? 0.5 * (1.0 + t / r) : 2.0 * e * e / (r * (r - t));
}

double rho_second(const SmoothKind& k, double t) {
  const double e = k.epsilon;
  if (k.fn == SmoothFn::kLogExp) {
    const double w = std::exp(-std::abs(t) / e);
    return w / (e * (1.0 + w) * (1.0 + w));
  }
  const double r = std::hypot(t, 2.0 * e);
  return 2.0 * e * e / (r * r * r);
}

namespace {

double h_of(const Instance& inst, const SmoothKind& kind, const std::vector<double>& l, double m) {
  double acc = 0.0;
  for (int i = 0; i < inst.k; ++i) acc += inst.probs[i] * rho_prime(kind, l[i] - m);
  return acc;
}

double dh_of(const Instance& inst, const SmoothKind& kind, const std::vector<double>& l, double m) {
  double acc = 0.0;
  for (int i = 0; i < inst.k; ++i) acc += inst.probs[i] * rho_second(kind, l[i] - m);
  return -acc;
}

}  // namespace

SmoothedVarInfo smoothed_var_info(const Instance& inst, const SmoothKind& kind,
                                  std::span<const double> x) {
  if (!(kind.epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  const std::vector<double> l = inst.losses_at(x);
  const double target = 1.0 - inst.beta;
  const auto [mn, mx] = std::minmax_element(l.begin(), l.end());
  double pad = 1.0 + kind.epsilon;
  double lo = *mn - pad;
  double hi = *mx + pad;
  SmoothedVarInfo info;
  // h decreases from 1 to 0; widen until it straddles the target.
  while ((h_of(inst, kind, l, lo) < target || h_of(inst, kind, l, hi) > target) &&
         info.bracket_expansions < 200) {
    pad *= 2.0;
    lo = *mn - pad;
    hi = *mx + pad;
    ++info.bracket_expansions;
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (h_of(inst, kind, l, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++info.bisection_steps;
  }
  double m = 0.5 * (lo + hi);
  double r = h_of(inst, kind, l, m) - target;
  for (int it = 0; it < 100 && std::abs(r) > 1e-12; ++it) {
    if (r > 0) {
      lo = m;
    } else {
      hi = m;
    }
    const double d = dh_of(inst, kind, l, m);
    double next = d < 0 ? m - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == m) break;
    m = next;
    r = h_of(inst, kind, l, m) - target;
    ++info.newton_steps;
  }
  info.m = m;
  info.residual = std::abs(r);
  return info;
}

double smoothed_var(const Instance& inst, const SmoothKind& kind, std::span<const double> x) {
  return smoothed_var_info(inst, kind, x).m;
}

std::vector<double> smoothed_var_grad(const Instance& inst, const SmoothKind& kind,
                                      std::span<const double> x) {
  const double m = smoothed_var(inst, kind, x);
  std::vector<double> g(inst.n, 0.0);
  double denom = 0.0;
  for (int i = 0; i < inst.k; ++i) {
    const double w = inst.probs[i] * rho_second(kind, inst.loss(i, x) - m);
    denom += w;
    for (int j = 0; j < inst.n; ++j) g[j] += w * inst.losses[i][j];
  }
  if (denom < 1e-300) {
    throw Error(ErrorCode::kDegenerateCurvature,
                "smoothing curvature vanished; epsilon too small for the loss scale");
  }
  for (double& v : g) v /= denom;
  return g;
}

SmoothResult smooth_minimize(const Instance& inst, std::span<const double> x0,
                             const SmoothOptions& options) {
  LpModel lmo;
  std::vector<int> cols(inst.n);
  for (int j = 0; j < inst.n; ++j) cols[j] = lmo.add_variable("x" + std::to_string(j + 1), -kInfinity);
  add_polytope_rows(inst.polytope, cols, lmo, false);

  SmoothResult res;
  res.x.assign(x0.begin(), x0.end());
  std::vector<double> schedule = options.schedule;
  if (schedule.empty()) schedule.push_back(1e-3);

  for (double eps : schedule) {
    const SmoothKind kind{options.fn, eps};
    SmoothStage stage;
    stage.epsilon = eps;
    double m = smoothed_var(inst, kind, res.x);
    std::vector<double> g;
    double gap = kInfinity;
    for (int it = 0; it < options.max_iterations; ++it) {
      g = smoothed_var_grad(inst, kind, res.x);
      for (int j = 0; j < inst.n; ++j) lmo.set_cost(cols[j], g[j]);
      const lp::LpSolution sol = lp::solve_lp(lmo);
      ++res.lps_solved;
      if (!sol.optimal()) {
        throw Error(ErrorCode::kNumericalFailure, "linear oracle over X failed");
      }
      std::vector<double> d(inst.n);
      gap = 0.0;
      for (int j = 0; j < inst.n; ++j) {
        d[j] = sol.x[cols[j]] - res.x[j];
        gap -= g[j] * d[j];
      }
      ++stage.iterations;
      if (gap <= options.gap_tol) break;
      double step = 1.0;
      bool moved = false;
      std::vector<double> trial(inst.n);
      while (step > 1e-14) {
        for (int j = 0; j < inst.n; ++j) trial[j] = res.x[j] + step * d[j];
        const double mt = smoothed_var(inst, kind, trial);
        if (mt <= m - 1e-4 * step * gap) {
          res.x = trial;
          m = mt;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    stage.m = m;
    stage.gap = gap;
    stage.converged = gap <= options.gap_tol;
    res.iterations += stage.iterations;
    res.stages.push_back(stage);
    res.m = m;
    res.grad = g;
    res.stationarity = gap;
    res.converged = stage.converged;
  }
  res.var_exact = var_of(inst, res.x);
  res.var_upper = var_upper_of(inst, res.x);
  res.singleton_argmin = res.var_upper - res.var_exact <= 1e-9 * std::max(1.0, std::abs(res.var_exact));
  return res;
}

}  // namespace varlpec
