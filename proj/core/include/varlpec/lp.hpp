#pragma once

#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace varlpec::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* status_name(LpStatus status);

struct Term {
  int var;
  double coef;
};

// Accumulating sparse linear expression. Repeated variables are summed when
// the expression is attached to a model.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(std::initializer_list<Term> terms) : terms_(terms) {}

  LinearExpr& add(int var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
  }
  LinearExpr& add(const LinearExpr& other, double scale = 1.0) {
    for (const Term& t : other.terms_) add(t.var, scale * t.coef);
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
};

struct Constraint {
  std::vector<Term> terms;  // merged, sorted by variable index
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

// Minimization LP with bounded variables and general rows.
class LpModel {
 public:
  int add_variable(std::string name, double lower = 0.0,
                   double upper = kInfinity, double cost = 0.0);
  void set_cost(int var, double cost);
  void set_bounds(int var, double lower, double upper);

  int add_constraint(const LinearExpr& expr, Relation relation, double rhs,
                     std::string name = {});
  int add_constraint(Constraint row);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_[j]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<double>& costs() const { return costs_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

  // Dense copy of one row; length equals num_variables().
  std::vector<double> dense_row(int i) const;

  // Throws Error(kInvalidModel) if an index or bound is out of order.
  void check() const;

 private:
  std::vector<Variable> vars_;
  std::vector<double> costs_;
  std::vector<Constraint> rows_;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  // Diagnostics from the final basis. Only meaningful when Optimal.
  double max_primal_residual = 0.0;
  double max_dual_infeasibility = 0.0;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  double phase1_infeasible_tol = 1e-7;
  int degenerate_streak_for_bland = 50;
  int refactor_period = 100;
  int max_iterations = 0;  // 0 = derived from problem size
};

// Bounded-variable primal simplex on a dense tableau. Deterministic for
// identical input. Throws Error(kNumericalFailure) when the iteration cap is
// hit.
LpSolution solve_lp(const LpModel& model, const SimplexOptions& options = {});

// Solves `model` augmented with `extra_rows`; `model` itself is not modified.
LpSolution solve_lp_with(const LpModel& model,
                         std::span<const Constraint> extra_rows,
                         const SimplexOptions& options = {});

// Plain-text LP listing (CPLEX-LP flavoured) for cross-checking with
// external solvers.
void write_lp_listing(const LpModel& model, std::ostream& out);

}  // namespace varlpec::lp
