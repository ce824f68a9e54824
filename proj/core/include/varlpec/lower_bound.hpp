#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "varlpec/lp.hpp"
#include "varlpec/scenario_model.hpp"

namespace varlpec {

enum class RelaxFamily { kZSubstitution, kConvexHull };
enum class MSign { kNonNeg, kNonPos };

struct RelaxKind {
  RelaxFamily family = RelaxFamily::kZSubstitution;
  MSign sign = MSign::kNonNeg;  // ignored for kConvexHull

  bool operator==(const RelaxKind&) const = default;
};

const char* family_name(RelaxFamily family);
const char* sign_name(MSign sign);

// Three-way disjunction on lambda_{i0}: I lambda = 0, II lambda = cap,
// III lambda strictly inside.
enum class CutBranch { kI, kII, kIII };

const char* branch_name(CutBranch branch);

struct CutSpec {
  int i0 = 0;  // 0-based scenario index
  CutBranch branch = CutBranch::kI;

  bool operator==(const CutSpec&) const = default;
};

// Cuts applied on top of a relaxation, plus scenarios whose tau is fixed to 0.
struct Fixings {
  std::vector<CutSpec> cuts;
  std::vector<int> tau_zero;
};

struct HullBounds {
  std::vector<double> L;  // min over X of x.y^i
  std::vector<double> U;  // max over X of x.y^i
  int lps_solved = 0;
};

// A relaxation LP together with the column layout needed to read it back.
struct RelaxModel {
  RelaxKind kind;
  lp::LpModel model;
  int m = -1;
  std::vector<int> tau;
  std::vector<lp::LinearExpr> x;       // x_j in model columns
  std::vector<std::vector<int>> z;     // z^i_j columns (z-substitution)
  std::vector<int> lambda, gamma, w;   // hull columns
  std::vector<double> cap;
};

// x = sum_j z^j in X, m = sum_j [z^j.y^j - cap_j tau_j], s >= 0, the
// sign-dependent sandwich on z^i.y^i - cap_i tau_i, and z bounds
// (0 <= z^i <= cap_i x when X >= 0, else |z^i| <= cap_i a). Throws
// kMissingAbsBound when X is not nonnegative and abs_bound is absent.
RelaxModel z_relax_model(const Instance& inst, MSign sign);

// 2k LPs; throws kEmptyPolytope / kUnboundedPolytope.
HullBounds hull_bounds(const Instance& inst, int threads = 1);

// Simple LP rows, gamma_i = x.y^i in [L_i, U_i], the McCormick envelope of
// w_i = gamma_i lambda_i and 0 = m + sum [cap_i tau_i - w_i].
RelaxModel hull_relax_model(const Instance& inst, const HullBounds& bounds);

// Adds the rows of the cuts and tau fixings in place.
void apply_fixings(RelaxModel& relax, const Instance& inst, const Fixings& fixings);

struct RelaxSolution {
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double value = lp::kInfinity;  // +inf when infeasible
  double m = 0.0;
  std::vector<double> x;
  std::vector<double> tau;
  std::vector<double> lambda_hat;  // lambda read back from z or directly
  int iterations = 0;

  bool optimal() const { return status == lp::LpStatus::kOptimal; }
};

RelaxSolution solve_relax(const RelaxModel& relax, const Instance& inst);

// z-relaxation of the given sign with `cut` and `extra` applied.
RelaxSolution cut_lp_value(const Instance& inst, MSign sign, const CutSpec& cut,
                           const Fixings& extra = {});

struct CutRecord {
  int i0 = 0;
  CutBranch branch = CutBranch::kI;
  MSign sign = MSign::kNonNeg;
  lp::LpStatus status = lp::LpStatus::kInfeasible;
  double value = lp::kInfinity;
};

struct CorollaryResult {
  double value = lp::kInfinity;
  double nonneg_value = lp::kInfinity;  // +inf if that sign's root is infeasible
  double nonpos_value = lp::kInfinity;
  double nonneg_root = lp::kInfinity;
  double nonpos_root = lp::kInfinity;
  std::vector<CutRecord> records;
  int lps_solved = 0;
};

// min over signs of max_j min(cut I, cut II, cut III at j). A sign whose
// root relaxation is infeasible contributes +inf without solving its cuts.
CorollaryResult corollary_bound(const Instance& inst, int threads = 1);

// CSV with header i0,branch,sign,status,value (1-based i0).
void write_cut_csv(const std::vector<CutRecord>& records, std::ostream& out);

}  // namespace varlpec
