#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varlpec/lower_bound.hpp"
#include "varlpec/lpec.hpp"
#include "varlpec/scenario_model.hpp"

namespace varlpec {

enum class LambdaStatus { kFree, kZero, kInterior, kCap };
enum class TauStatus { kFree, kZero, kPositive };
enum class SignState { kUnknown, kNonNeg, kNonPos };

const char* lambda_status_name(LambdaStatus s);
const char* tau_status_name(TauStatus s);
const char* sign_state_name(SignState s);

struct NodeState {
  std::vector<LambdaStatus> lambda;
  std::vector<TauStatus> tau;
  SignState sign = SignState::kUnknown;
  RelaxFamily family = RelaxFamily::kZSubstitution;

  static NodeState root(int k, RelaxFamily family, SignState sign);
  // Compact key, one character per status; used for memoisation.
  std::string key() const;
  bool fully_fixed() const;

  bool operator==(const NodeState&) const = default;
};

// Returns a reason when the statuses contradict each other (the node is
// infeasible without solving an LP), nullopt otherwise.
std::optional<std::string> contradiction(const Instance& inst, const NodeState& node);

// Fixes tau_i = 0 wherever tau_i > 0 is impossible without an LP: lambda_i is
// Zero or Interior, or pinning lambda_i at cap would push the fixed mass past
// one. Returns the indices whose tau status changed (only those with lambda
// still Free are reported, the others are implied by the cut rows).
std::vector<int> close_implications(const Instance& inst, NodeState& node);

Fixings node_fixings(const NodeState& node);

struct NodeLpResult {
  RelaxSolution solution;  // for kUnknown zsub nodes: the lower of both signs
  bool preprocessed = false;  // contradiction found, no LP solved
  std::string reason;
  int lps_solved = 0;
};

// Relaxation LP of the node. `hull` is required for kConvexHull nodes.
NodeLpResult node_lp(const Instance& inst, const NodeState& node,
                     const HullBounds* hull = nullptr);

enum class FathomReason { kNone, kBoundDominated, kInfeasible, kIntegralPiece };
const char* fathom_name(FathomReason r);

struct TreeNode {
  int id = 0;
  int parent = -1;
  std::string label;   // branch taken from the parent, e.g. "lambda1 = cap"
  bool solved = false; // an LP was solved for this node
  bool grey = false;   // eliminated by the preprocessor
  lp::LpStatus status = lp::LpStatus::kOptimal;
  double bound = lp::kInfinity;
  FathomReason fathom = FathomReason::kNone;
};

enum class CertStatus { kCertified, kNotCertified, kBudgetExceeded, kInfeasible };
const char* cert_status_name(CertStatus s);

struct Certificate {
  CertStatus status = CertStatus::kNotCertified;
  double m_ub = lp::kInfinity;
  LpecPoint witness;
  double m_lb = -lp::kInfinity;
  double gap = lp::kInfinity;  // (m_ub - m_lb) / max(|m_lb|, 1)
  RelaxFamily family = RelaxFamily::kZSubstitution;
  SignState sign = SignState::kUnknown;  // sign established by the probes
  int lps_solved = 0;      // relaxation and piece LPs
  int lps_eliminated = 0;  // nodes closed by the preprocessor
  int aux_lps = 0;         // hull bounds and upper-bound refinement
  int nodes = 0;
  std::vector<std::string> fixings;
  std::vector<TreeNode> tree;
};

double relative_gap(double m_ub, double m_lb);

enum class RelaxChoice { kAuto, kZSubstitution, kConvexHull };

struct SearchOptions {
  RelaxChoice relax = RelaxChoice::kAuto;
  double tol = 1e-6;   // fathoming / certification, relative
  long long budget = 100000;  // node cap for solve_global
  int threads = 1;
};

struct FixingRoundResult {
  NodeState node;
  std::vector<std::string> fixings;
  int lps_solved = 0;
  int lps_eliminated = 0;
};

// One round of sibling elimination at `node` against m_ub. Free lambda
// indices are taken in priority groups (candidate at cap, then interior,
// then zero, then tau via the lambda = cap sibling), ascending within each
// group; the round stops after the first group that fixes something and
// applies close_implications(). An empty fixings list means the round stalled.
FixingRoundResult fixing_round(const Instance& inst, double m_ub, const NodeState& node,
                               const LpecPoint& candidate, const SearchOptions& options = {},
                               const HullBounds* hull = nullptr);

// Certifies candidate.m as the global minimum or reports kNotCertified.
// Throws kInvalidArgument if the candidate is not LPEC feasible.
Certificate verify_global(const Instance& inst, const LpecPoint& candidate,
                          const SearchOptions& options = {});

// Best-bound branch and bound on the lambda disjunction.
Certificate solve_global(const Instance& inst, const SearchOptions& options = {});

enum class TreeFormat { kDot, kText };

std::string export_tree(const Certificate& cert, TreeFormat format);

// Inverse of the text export: recovers id, parent, label, bound, grey and
// fathom fields. Throws kParseError.
std::vector<TreeNode> parse_text_tree(const std::string& text);

}  // namespace varlpec
