#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "varlpec/errors.hpp"
#include "varlpec/lp.hpp"

namespace varlpec {

// One linear row `coeffs . x (<= or =) rhs` of the feasible polytope.
struct PolyRow {
  std::vector<double> coeffs;
  double rhs = 0.0;

  bool operator==(const PolyRow&) const = default;
};

// X = { x : eq rows hold, ineq rows (<=) hold, lower <= x <= upper }.
struct Polytope {
  std::vector<PolyRow> eq;
  std::vector<PolyRow> ineq;
  std::vector<double> lower;  // may hold -inf
  std::vector<double> upper;  // may hold +inf
  // |x| <= abs_bound on X. Filled in by prepare() when absent.
  std::optional<std::vector<double>> abs_bound;

  // True when lower >= 0 coordinatewise.
  bool nonneg() const;

  bool operator==(const Polytope&) const = default;
};

struct Instance {
  int n = 0;  // assets
  int k = 0;  // scenarios
  double beta = 0.9;
  std::vector<double> probs;                // length k
  std::vector<std::vector<double>> losses;  // k rows of length n
  Polytope polytope;

  // p_i / (1 - beta), the upper bound on the dual weight lambda_i.
  double cap(int i) const { return probs[i] / (1.0 - beta); }
  // x . y^i
  double loss(int i, std::span<const double> x) const;
  std::vector<double> losses_at(std::span<const double> x) const;

  bool operator==(const Instance&) const = default;
};

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  // Per-coordinate extremes of X from the 2n bound LPs (empty if not run).
  std::vector<double> coord_min;
  std::vector<double> coord_max;
  std::vector<double> abs_bound;
  int lps_solved = 0;

  bool ok() const { return issues.empty(); }
  bool has(ErrorCode code) const;
};

// Checks every instance invariant and probes X with 2n LPs.
ValidationReport validate(const Instance& inst);

// validate() and fill in abs_bound; throws Error on the first issue.
Instance prepare(Instance inst);

// Adds the rows of X over `x_vars` to `model`. `x_vars[j]` is the column of
// x_j; coordinate bounds are emitted as rows when `bounds_as_rows` is set and
// as variable bounds otherwise.
void add_polytope_rows(const Polytope& poly, std::span<const int> x_vars,
                       lp::LpModel& model, bool bounds_as_rows);

// Same, with x_j given as a linear expression in other columns.
void add_polytope_rows(const Polytope& poly,
                       std::span<const lp::LinearExpr> x_exprs,
                       lp::LpModel& model);

// 3 assets, 27 equiprobable scenarios on {x >= 0, sum x = 1, r.x >= 1/10}.
// Scenario j = 9(i1-1) + 3(i2-1) + i3 carries (d1(i1), d2(i2), d3(i3)).
Instance paper_instance(double beta = 0.9);

// Random instance on the unit simplex (optionally cut by one extra
// half-space), with quarter-integer losses and rational probabilities.
// Identical seeds give identical instances on every platform.
Instance random_instance(std::uint64_t seed, int n, int k);

// Instance file text: one JSON document, numbers with 17 significant digits.
std::string to_text(const Instance& inst);
// Throws Error(kParseError) with line/field context.
Instance parse_instance(const std::string& text);

void save(const Instance& inst, const std::string& path);
Instance load(const std::string& path);

// FNV-1a over to_text(); stable identifier used in reports.
std::string digest(const Instance& inst);

}  // namespace varlpec
