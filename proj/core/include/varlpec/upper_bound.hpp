#pragma once

#include <span>
#include <vector>

#include "varlpec/lp.hpp"
#include "varlpec/lpec.hpp"
#include "varlpec/scenario_model.hpp"

namespace varlpec {

// One piece of the LPEC feasible set. free_tau[i]: tau_i >= 0 kept (and
// lambda_i = cap); otherwise tau_i = 0. eq_s[i]: s_i = 0; otherwise s_i >= 0.
struct PieceSpec {
  std::vector<bool> free_tau;
  std::vector<bool> eq_s;

  // Builds a spec from 0-based index lists.
  static PieceSpec from_sets(int k, std::span<const int> free_tau_idx,
                             std::span<const int> eq_s_idx);
  // Sizes match k and free_tau implies eq_s.
  bool valid(int k) const;

  bool operator==(const PieceSpec&) const = default;
};

struct PieceSolution {
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double m = lp::kInfinity;
  std::vector<double> x;
  std::vector<double> tau;
  int iterations = 0;

  bool optimal() const { return status == lp::LpStatus::kOptimal; }
};

// min m over (m, x, tau) restricted to the piece. Throws kInvalidArgument if
// the piece is inconsistent.
PieceSolution restricted_lp(const Instance& inst, const PieceSpec& piece);

enum class SweepStrategy { kAuto, kFullSubsets, kSingletonsThenPairs };

struct ImproveOptions {
  SweepStrategy strategy = SweepStrategy::kAuto;
  int full_sweep_limit = 10;  // kAuto: full sweep when |beta_tau|+|beta_lambda| <= this
  int max_sweeps = 1000;
  int threads = 1;
};

struct UpperBoundStep {
  int sweep = 0;
  PieceSpec piece;
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double lp_value = lp::kInfinity;   // m_{nu + 1/2}
  double refreshed = lp::kInfinity;  // VaR_beta(x^nu)
  bool accepted = false;
};

struct UpperBoundTrace {
  double m0 = 0.0;
  std::vector<UpperBoundStep> steps;
  double m_ub = 0.0;
  std::vector<double> x_ub;
  LpecPoint witness;
  int sweeps = 0;
  int lps_solved = 0;
};

// Piece-switching descent from start_x. Each sweep enumerates subsets of
// the degenerate index sets at the current anchor, keeps the lowest
// refreshed VaR, and re-anchors on strict improvement.
UpperBoundTrace improve(const Instance& inst, std::span<const double> start_x,
                        const ImproveOptions& options = {});

struct PieceEnumeration {
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double value = lp::kInfinity;
  LpecPoint witness;
  PieceSpec piece;
  long long assignments = 0;  // 3^k
  long long lps_solved = 0;
};

inline constexpr int kEnumerateMaxK = 12;

// Exact minimum VaR by solving every consistent piece. Each scenario takes
// one of three states: lambda = cap (tau free, s = 0), lambda interior
// (tau = 0, s = 0) or lambda = 0 (tau = 0, s free). Throws kTooLarge when
// k > kEnumerateMaxK.
PieceEnumeration enumerate_pieces(const Instance& inst, int threads = 1);

}  // namespace varlpec
