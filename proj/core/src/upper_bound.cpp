#include "varlpec/upper_bound.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varlpec/cvar.hpp"
#include "varlpec/parallel.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LinearExpr;
using lp::LpModel;
using lp::Relation;

PieceSpec PieceSpec::from_sets(int k, std::span<const int> free_tau_idx,
                               std::span<const int> eq_s_idx) {
  PieceSpec p;
  p.free_tau.assign(k, false);
  p.eq_s.assign(k, false);
  for (int i : free_tau_idx) p.free_tau.at(i) = true;
  for (int i : eq_s_idx) p.eq_s.at(i) = true;
  return p;
}

bool PieceSpec::valid(int k) const {
  if (static_cast<int>(free_tau.size()) != k || static_cast<int>(eq_s.size()) != k) {
    return false;
  }
  for (int i = 0; i < k; ++i) {
    if (free_tau[i] && !eq_s[i]) return false;
  }
  return true;
}

PieceSolution restricted_lp(const Instance& inst, const PieceSpec& piece) {
  if (!piece.valid(inst.k)) {
    throw Error(ErrorCode::kInvalidArgument,
                "piece spec sizes mismatch or free tau outside eq_s");
  }
  LpModel model;
  const int m = model.add_variable("m", -kInfinity, kInfinity, 1.0);
  std::vector<int> x(inst.n);
  for (int j = 0; j < inst.n; ++j) x[j] = model.add_variable("x" + std::to_string(j + 1), -kInfinity);
  add_polytope_rows(inst.polytope, x, model, false);
  std::vector<int> tau(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    tau[i] = model.add_variable("tau" + std::to_string(i + 1), 0.0,
                                piece.free_tau[i] ? kInfinity : 0.0);
  }
  for (int i = 0; i < inst.k; ++i) {
    LinearExpr s;
    s.add(m, 1.0).add(tau[i], 1.0);
    for (int j = 0; j < inst.n; ++j) s.add(x[j], -inst.losses[i][j]);
    model.add_constraint(s, piece.eq_s[i] ? Relation::kEqual : Relation::kGreaterEqual,
                         0.0, "s" + std::to_string(i + 1));
  }
  const lp::LpSolution sol = lp::solve_lp(model);
  PieceSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.optimal()) {
    out.m = sol.x[m];
    out.x.resize(inst.n);
    out.tau.resize(inst.k);
    for (int j = 0; j < inst.n; ++j) out.x[j] = sol.x[x[j]];
    for (int i = 0; i < inst.k; ++i) out.tau[i] = sol.x[tau[i]];
  } else if (sol.status == lp::LpStatus::kUnbounded) {
    out.m = -kInfinity;
  }
  return out;
}

namespace {

IndexClassification robust_classify(const Instance& inst, const LpecPoint& pt) {
  double tol = kClassifyTol;
  for (int attempt = 0;; ++attempt) {
    try {
      return classify(inst, pt, tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAmbiguousClassification || attempt == 3) throw;
      tol *= 0.1;
    }
  }
}

std::vector<unsigned> sweep_masks(int degenerate, const ImproveOptions& options) {
  SweepStrategy strategy = options.strategy;
  if (strategy == SweepStrategy::kAuto) {
    strategy = degenerate <= options.full_sweep_limit ? SweepStrategy::kFullSubsets
                                                      : SweepStrategy::kSingletonsThenPairs;
  }
  std::vector<unsigned> masks;
  if (strategy == SweepStrategy::kFullSubsets && degenerate < 31) {
    for (unsigned mask = 0; mask < (1u << degenerate); ++mask) masks.push_back(mask);
    return masks;
  }
  // Singletons then pairs; each mask is a list of at most two positions
  // encoded as (a + 1) | (b + 1) << 16.
  masks.push_back(0);
  for (int a = 0; a < degenerate; ++a) masks.push_back(static_cast<unsigned>(a + 1));
  for (int a = 0; a < degenerate; ++a) {
    for (int b = a + 1; b < degenerate; ++b) {
      masks.push_back(static_cast<unsigned>(a + 1) | (static_cast<unsigned>(b + 1) << 16));
    }
  }
  return masks;
}

bool selected(unsigned mask, int pos, bool full) {
  if (full) return (mask >> pos) & 1u;
  const unsigned p = static_cast<unsigned>(pos + 1);
  return (mask & 0xffffu) == p || (mask >> 16) == p;
}

}  // namespace

UpperBoundTrace improve(const Instance& inst, std::span<const double> start_x,
                        const ImproveOptions& options) {
  UpperBoundTrace trace;
  trace.x_ub.assign(start_x.begin(), start_x.end());
  trace.witness = point_from_portfolio(inst, trace.x_ub);
  trace.m0 = trace.witness.m;
  trace.m_ub = trace.m0;

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const LpecPoint& anchor = trace.witness;
    const IndexClassification cls = robust_classify(inst, anchor);
    std::vector<int> degenerate(cls.beta_tau);
    degenerate.insert(degenerate.end(), cls.beta_lambda.begin(), cls.beta_lambda.end());
    const int n_tau = static_cast<int>(cls.beta_tau.size());
    const int d = static_cast<int>(degenerate.size());
    if (d == 0) break;
    ++trace.sweeps;

    const bool full = d < 31 && (options.strategy == SweepStrategy::kFullSubsets ||
                                 (options.strategy == SweepStrategy::kAuto &&
                                  d <= options.full_sweep_limit));
    const std::vector<unsigned> masks = sweep_masks(d, options);

    PieceSpec base;
    base.free_tau.assign(inst.k, false);
    base.eq_s.assign(inst.k, false);
    for (int i : cls.alpha_tau) base.free_tau[i] = true;
    for (int i : cls.alpha_lambda) base.eq_s[i] = true;

    auto solve_mask = [&](std::size_t idx) {
      UpperBoundStep step;
      step.sweep = sweep;
      step.piece = base;
      for (int pos = 0; pos < d; ++pos) {
        if (!selected(masks[idx], pos, full)) continue;
        if (pos < n_tau) {
          step.piece.free_tau[degenerate[pos]] = true;
        } else {
          step.piece.eq_s[degenerate[pos]] = true;
        }
      }
      const PieceSolution sol = restricted_lp(inst, step.piece);
      step.status = sol.status;
      if (sol.optimal()) {
        step.lp_value = sol.m;
        step.refreshed = var_of(inst, sol.x);
      }
      return std::make_pair(step, sol.x);
    };
    auto results = parallel_map(masks.size(), options.threads, solve_mask);
    trace.lps_solved += static_cast<int>(results.size());

    int best = -1;
    double best_value = trace.m_ub;
    const double eps = 1e-9 * std::max(1.0, std::abs(trace.m_ub));
    for (std::size_t r = 0; r < results.size(); ++r) {
      const UpperBoundStep& step = results[r].first;
      if (step.status == lp::LpStatus::kOptimal && step.refreshed < best_value - eps) {
        best = static_cast<int>(r);
        best_value = step.refreshed;
      }
    }
    for (std::size_t r = 0; r < results.size(); ++r) {
      results[r].first.accepted = static_cast<int>(r) == best;
      trace.steps.push_back(results[r].first);
    }
    if (best < 0) break;
    trace.x_ub = results[best].second;
    trace.witness = point_from_portfolio(inst, trace.x_ub);
    trace.m_ub = trace.witness.m;
  }
  return trace;
}

namespace {

enum PieceState : char { kStateCap = 0, kStateInterior = 1, kStateZero = 2 };

}  // namespace

PieceEnumeration enumerate_pieces(const Instance& inst, int threads) {
  if (inst.k > kEnumerateMaxK) {
    throw Error(ErrorCode::kTooLarge, "piece enumeration limited to k <= " +
                                          std::to_string(kEnumerateMaxK) + ", got " +
                                          std::to_string(inst.k));
  }
  long long total = 1;
  for (int i = 0; i < inst.k; ++i) total *= 3;
  PieceEnumeration out;
  out.assignments = total;

  std::vector<std::vector<char>> candidates;
  for (long long code = 0; code < total; ++code) {
    std::vector<char> state(inst.k);
    long long c = code;
    double cap_fixed = 0.0;
    double cap_interior = 0.0;
    for (int i = 0; i < inst.k; ++i) {
      state[i] = static_cast<char>(c % 3);
      c /= 3;
      if (state[i] == kStateCap) cap_fixed += inst.cap(i);
      if (state[i] == kStateInterior) cap_interior += inst.cap(i);
    }
    if (cap_fixed > 1.0 + 1e-12 || cap_fixed + cap_interior < 1.0 - 1e-12) continue;
    candidates.push_back(std::move(state));
  }

  auto solve = [&](std::size_t idx) {
    const std::vector<char>& state = candidates[idx];
    PieceSpec piece;
    piece.free_tau.resize(inst.k);
    piece.eq_s.resize(inst.k);
    for (int i = 0; i < inst.k; ++i) {
      piece.free_tau[i] = state[i] == kStateCap;
      piece.eq_s[i] = state[i] != kStateZero;
    }
    return std::make_pair(piece, restricted_lp(inst, piece));
  };
  const auto results = parallel_map(candidates.size(), threads, solve);
  out.lps_solved = static_cast<long long>(results.size());

  int best = -1;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const PieceSolution& sol = results[r].second;
    if (sol.status == lp::LpStatus::kUnbounded) {
      out.status = lp::LpStatus::kUnbounded;
      out.value = -kInfinity;
      return out;
    }
    if (sol.optimal() && sol.m < out.value) {
      out.value = sol.m;
      best = static_cast<int>(r);
    }
  }
  if (best < 0) return out;

  out.status = lp::LpStatus::kOptimal;
  out.piece = results[best].first;
  const PieceSolution& sol = results[best].second;
  const std::vector<char>& state = candidates[best];
  LpecPoint& w = out.witness;
  w.m = sol.m;
  w.x = sol.x;
  w.tau = sol.tau;
  w.lambda.assign(inst.k, 0.0);
  double remaining = 1.0;
  for (int i = 0; i < inst.k; ++i) {
    if (state[i] == kStateCap) {
      w.lambda[i] = inst.cap(i);
      remaining -= w.lambda[i];
    }
  }
  for (int i = 0; i < inst.k; ++i) {
    if (state[i] != kStateInterior) continue;
    w.lambda[i] = std::clamp(remaining, 0.0, inst.cap(i));
    remaining -= w.lambda[i];
  }
  return out;
}

}  // namespace varlpec
