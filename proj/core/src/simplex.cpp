// Dense bounded-variable primal simplex.
//
// Every row i of the model becomes a_i x + s_i = b_i with a slack whose bounds
// encode the relation (<=: [0,inf), >=: (-inf,0], =: [0,0]). Rows whose
// initial residual cannot be absorbed by the slack get an artificial column.
// Phase 1 minimises the sum of artificials, phase 2 the model objective.
// Pricing is Dantzig's rule with a Harris two-pass ratio test; after a streak
// of degenerate pivots the solver switches to Bland's rule until the next
// non-degenerate step.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "varlpec/errors.hpp"
#include "varlpec/lp.hpp"

namespace varlpec::lp {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class NonbasicAt { kLower, kUpper, kZero, kBasic };

class DenseSimplex {
 public:
  DenseSimplex(const LpModel& model, std::span<const Constraint> extra,
               const SimplexOptions& options)
      : options_(options) {
    model.check();
    num_struct_ = model.num_variables();
    std::vector<const Constraint*> rows;
    for (const Constraint& c : model.constraints()) rows.push_back(&c);
    for (const Constraint& c : extra) {
      for (const Term& t : c.terms) {
        if (t.var < 0 || t.var >= num_struct_ || !std::isfinite(t.coef)) {
          throw Error(ErrorCode::kInvalidModel,
                      "extra row references unknown variable");
        }
      }
      rows.push_back(&c);
    }
    num_rows_ = static_cast<int>(rows.size());
    num_cols_ = num_struct_ + 2 * num_rows_;

    a_full_ = RowMatrix::Zero(num_rows_, num_cols_);
    rhs_ = Eigen::VectorXd::Zero(num_rows_);
    lower_.assign(num_cols_, 0.0);
    upper_.assign(num_cols_, 0.0);
    cost_.assign(num_cols_, 0.0);
    value_.assign(num_cols_, 0.0);
    state_.assign(num_cols_, NonbasicAt::kLower);
    head_.assign(num_rows_, -1);

    for (int j = 0; j < num_struct_; ++j) {
      lower_[j] = model.variable(j).lower;
      upper_[j] = model.variable(j).upper;
      model_cost_.push_back(model.costs()[j]);
      if (std::isfinite(lower_[j])) {
        value_[j] = lower_[j];
        state_[j] = NonbasicAt::kLower;
      } else if (std::isfinite(upper_[j])) {
        value_[j] = upper_[j];
        state_[j] = NonbasicAt::kUpper;
      } else {
        value_[j] = 0.0;
        state_[j] = NonbasicAt::kZero;
      }
    }

    for (int r = 0; r < num_rows_; ++r) {
      const Constraint& row = *rows[r];
      double activity = 0.0;
      for (const Term& t : row.terms) {
        a_full_(r, t.var) += t.coef;
      }
      for (const Term& t : row.terms) activity += t.coef * value_[t.var];
      rhs_(r) = row.rhs;
      const int slack = slack_col(r);
      const int art = art_col(r);
      a_full_(r, slack) = 1.0;
      switch (row.relation) {
        case Relation::kLessEqual:
          lower_[slack] = 0.0;
          upper_[slack] = kInfinity;
          break;
        case Relation::kGreaterEqual:
          lower_[slack] = -kInfinity;
          upper_[slack] = 0.0;
          break;
        case Relation::kEqual:
          lower_[slack] = 0.0;
          upper_[slack] = 0.0;
          break;
      }
      const double residual = row.rhs - activity;
      const bool slack_absorbs =
          residual >= lower_[slack] && residual <= upper_[slack];
      if (slack_absorbs) {
        a_full_(r, art) = 1.0;
        lower_[art] = upper_[art] = 0.0;
        state_[art] = NonbasicAt::kLower;
        head_[r] = slack;
        value_[slack] = residual;
        state_[slack] = NonbasicAt::kBasic;
      } else {
        a_full_(r, art) = residual >= 0.0 ? 1.0 : -1.0;
        lower_[art] = 0.0;
        upper_[art] = kInfinity;
        head_[r] = art;
        value_[art] = std::abs(residual);
        state_[art] = NonbasicAt::kBasic;
        value_[slack] = 0.0;
        state_[slack] = NonbasicAt::kLower;
        if (!std::isfinite(lower_[slack])) state_[slack] = NonbasicAt::kUpper;
      }
    }

    // Initial basis is diagonal with entries +-1, so B^{-1}A is a row scaling.
    tableau_ = a_full_;
    for (int r = 0; r < num_rows_; ++r) {
      const double diag = a_full_(r, head_[r]);
      if (diag < 0.0) tableau_.row(r) *= -1.0;
    }

    max_iterations_ = options_.max_iterations > 0
                          ? options_.max_iterations
                          : 50 * (num_rows_ + num_cols_) + 1000;
  }

  LpSolution solve() {
    LpSolution sol;
    // Phase 1.
    bool need_phase1 = false;
    for (int r = 0; r < num_rows_; ++r) {
      if (head_[r] == art_col(r)) {
        cost_[head_[r]] = 1.0;
        need_phase1 = true;
      }
    }
    if (need_phase1) {
      compute_reduced_costs();
      const Outcome outcome = iterate();
      (void)outcome;  // phase 1 is bounded below by zero
      double infeasibility = 0.0;
      for (int r = 0; r < num_rows_; ++r) {
        if (is_artificial(head_[r])) infeasibility += value_[head_[r]];
      }
      if (infeasibility > options_.phase1_infeasible_tol) {
        sol.status = LpStatus::kInfeasible;
        sol.iterations = iterations_;
        return sol;
      }
      drive_out_artificials();
    }
    for (int r = 0; r < num_rows_; ++r) {
      const int art = art_col(r);
      lower_[art] = upper_[art] = 0.0;
      if (state_[art] != NonbasicAt::kBasic) {
        value_[art] = 0.0;
        state_[art] = NonbasicAt::kLower;
      }
    }
    if (need_phase1) reinvert();

    // Phase 2.
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < num_struct_; ++j) cost_[j] = model_cost_[j];
    compute_reduced_costs();
    const Outcome outcome = iterate();
    sol.iterations = iterations_;
    if (outcome == Outcome::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }
    reinvert();
    compute_reduced_costs();

    sol.status = LpStatus::kOptimal;
    sol.x.assign(value_.begin(), value_.begin() + num_struct_);
    for (int j = 0; j < num_struct_; ++j) {
      // Remove Harris-tolerance overshoot on basic variables.
      sol.x[j] = std::clamp(sol.x[j], lower_[j], upper_[j]);
    }
    double objective = 0.0;
    for (int j = 0; j < num_struct_; ++j) objective += model_cost_[j] * sol.x[j];
    sol.objective = objective;
    sol.max_primal_residual = primal_residual(sol.x);
    sol.max_dual_infeasibility = dual_infeasibility();
    assert(sol.max_dual_infeasibility <= 10.0 * options_.optimality_tol);
    return sol;
  }

 private:
  enum class Outcome { kOptimal, kUnbounded };

  int slack_col(int r) const { return num_struct_ + r; }
  int art_col(int r) const { return num_struct_ + num_rows_ + r; }
  bool is_artificial(int j) const { return j >= num_struct_ + num_rows_; }

  void compute_reduced_costs() {
    reduced_ = Eigen::Map<const Eigen::VectorXd>(cost_.data(), num_cols_);
    for (int r = 0; r < num_rows_; ++r) {
      const double cb = cost_[head_[r]];
      if (cb != 0.0) reduced_ -= cb * tableau_.row(r).transpose();
    }
    for (int r = 0; r < num_rows_; ++r) reduced_(head_[r]) = 0.0;
  }

  // Entering candidate and its direction (+1 increase, -1 decrease).
  bool choose_entering(int* entering, int* direction) const {
    const double tol = options_.optimality_tol;
    int best = -1;
    int best_dir = 0;
    double best_score = 0.0;
    for (int j = 0; j < num_cols_; ++j) {
      const NonbasicAt s = state_[j];
      if (s == NonbasicAt::kBasic) continue;
      if (lower_[j] == upper_[j]) continue;
      const double d = reduced_(j);
      int dir = 0;
      if (d < -tol && (s == NonbasicAt::kLower || s == NonbasicAt::kZero)) {
        dir = 1;
      } else if (d > tol &&
                 (s == NonbasicAt::kUpper || s == NonbasicAt::kZero)) {
        dir = -1;
      }
      if (dir == 0) continue;
      if (bland_) {
        *entering = j;
        *direction = dir;
        return true;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        best_dir = dir;
      }
    }
    if (best < 0) return false;
    *entering = best;
    *direction = best_dir;
    return true;
  }

  // Distance the basic variable in row r may travel before its bound,
  // for a unit step of the entering variable producing change -alpha.
  double room(int r, double alpha, double slack_tol) const {
    const int b = head_[r];
    if (alpha > 0.0) {
      if (!std::isfinite(lower_[b])) return kInfinity;
      return std::max(0.0, value_[b] - lower_[b] + slack_tol) / alpha;
    }
    if (!std::isfinite(upper_[b])) return kInfinity;
    return std::max(0.0, upper_[b] - value_[b] + slack_tol) / (-alpha);
  }

  Outcome iterate() {
    int degenerate_streak = 0;
    bland_ = false;
    while (true) {
      if (iterations_ >= max_iterations_) {
        throw Error(ErrorCode::kNumericalFailure,
                    "simplex iteration cap reached (" +
                        std::to_string(max_iterations_) + ")");
      }
      if (iterations_ > 0 && iterations_ % options_.refactor_period == 0) {
        reinvert();
        compute_reduced_costs();
      }
      int q = -1;
      int dir = 0;
      if (!choose_entering(&q, &dir)) return Outcome::kOptimal;
      ++iterations_;

      const double range = upper_[q] - lower_[q];
      int leave_row = -1;
      double step = kInfinity;
      if (bland_) {
        for (int r = 0; r < num_rows_; ++r) {
          const double alpha = dir * tableau_(r, q);
          if (std::abs(alpha) <= options_.pivot_tol) continue;
          const double lim = room(r, alpha, 0.0);
          if (lim < step ||
              (lim == step && leave_row >= 0 && head_[r] < head_[leave_row])) {
            step = lim;
            leave_row = r;
          }
        }
      } else {
        double theta_max = kInfinity;
        const double harris = 0.1 * options_.feasibility_tol;
        for (int r = 0; r < num_rows_; ++r) {
          const double alpha = dir * tableau_(r, q);
          if (std::abs(alpha) <= options_.pivot_tol) continue;
          theta_max = std::min(theta_max, room(r, alpha, harris));
        }
        if (std::isfinite(theta_max)) {
          double best_alpha = 0.0;
          for (int r = 0; r < num_rows_; ++r) {
            const double alpha = dir * tableau_(r, q);
            if (std::abs(alpha) <= options_.pivot_tol) continue;
            const double lim = room(r, alpha, 0.0);
            if (lim <= theta_max && std::abs(alpha) > best_alpha) {
              best_alpha = std::abs(alpha);
              leave_row = r;
              step = lim;
            }
          }
        }
      }

      if (leave_row < 0 && !std::isfinite(range)) return Outcome::kUnbounded;

      const bool flip = std::isfinite(range) && range <= step;
      if (flip) step = range;

      if (step <= 1e-12) {
        if (++degenerate_streak > options_.degenerate_streak_for_bland) {
          bland_ = true;
        }
      } else {
        degenerate_streak = 0;
        bland_ = false;
      }

      if (step != 0.0) {
        for (int r = 0; r < num_rows_; ++r) {
          const double alpha = tableau_(r, q);
          if (alpha != 0.0) value_[head_[r]] -= dir * step * alpha;
        }
        value_[q] += dir * step;
      }

      if (flip) {
        if (dir > 0) {
          value_[q] = upper_[q];
          state_[q] = NonbasicAt::kUpper;
        } else {
          value_[q] = lower_[q];
          state_[q] = NonbasicAt::kLower;
        }
        continue;
      }

      const int leaving = head_[leave_row];
      const double alpha = dir * tableau_(leave_row, q);
      if (alpha > 0.0) {
        value_[leaving] = lower_[leaving];
        state_[leaving] = NonbasicAt::kLower;
      } else {
        value_[leaving] = upper_[leaving];
        state_[leaving] = NonbasicAt::kUpper;
      }
      pivot(leave_row, q);
    }
  }

  void pivot(int r, int q) {
    const double piv = tableau_(r, q);
    tableau_.row(r) /= piv;
    for (int i = 0; i < num_rows_; ++i) {
      if (i == r) continue;
      const double f = tableau_(i, q);
      if (f != 0.0) tableau_.row(i) -= f * tableau_.row(r);
      tableau_(i, q) = 0.0;
    }
    const double fd = reduced_(q);
    if (fd != 0.0) reduced_ -= fd * tableau_.row(r).transpose();
    reduced_(q) = 0.0;
    tableau_(r, q) = 1.0;
    state_[head_[r]] = state_[head_[r]] == NonbasicAt::kBasic
                           ? NonbasicAt::kLower
                           : state_[head_[r]];
    head_[r] = q;
    state_[q] = NonbasicAt::kBasic;
  }

  void drive_out_artificials() {
    for (int r = 0; r < num_rows_; ++r) {
      if (!is_artificial(head_[r])) continue;
      int best = -1;
      double best_abs = 1e-9;
      for (int j = 0; j < num_struct_ + num_rows_; ++j) {
        if (state_[j] == NonbasicAt::kBasic) continue;
        const double a = std::abs(tableau_(r, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays at zero
      const int art = head_[r];
      pivot(r, best);
      value_[art] = 0.0;
      state_[art] = NonbasicAt::kLower;
    }
  }

  // Rebuilds B^{-1}A and the basic values from the original matrix.
  void reinvert() {
    Eigen::MatrixXd basis(num_rows_, num_rows_);
    for (int r = 0; r < num_rows_; ++r) basis.col(r) = a_full_.col(head_[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    if (!(lu.rcond() > 1e-13)) return;
    Eigen::VectorXd rhs = rhs_;
    for (int j = 0; j < num_cols_; ++j) {
      if (state_[j] == NonbasicAt::kBasic || value_[j] == 0.0) continue;
      rhs -= value_[j] * a_full_.col(j);
    }
    const Eigen::VectorXd basic = lu.solve(rhs);
    RowMatrix fresh = lu.solve(Eigen::MatrixXd(a_full_));
    for (int r = 0; r < num_rows_; ++r) {
      fresh(r, head_[r]) = 1.0;
      value_[head_[r]] = basic(r);
    }
    tableau_ = std::move(fresh);
  }

  double primal_residual(const std::vector<double>& x) const {
    double worst = 0.0;
    for (int r = 0; r < num_rows_; ++r) {
      double activity = 0.0;
      for (int j = 0; j < num_struct_; ++j) activity += a_full_(r, j) * x[j];
      const int slack = slack_col(r);
      const double s = rhs_(r) - activity;
      double violation = 0.0;
      if (s < lower_[slack]) violation = lower_[slack] - s;
      if (s > upper_[slack]) violation = s - upper_[slack];
      worst = std::max(worst, violation);
    }
    return worst;
  }

  double dual_infeasibility() const {
    double worst = 0.0;
    for (int j = 0; j < num_cols_; ++j) {
      const NonbasicAt s = state_[j];
      if (s == NonbasicAt::kBasic || lower_[j] == upper_[j]) continue;
      const double d = reduced_(j);
      if (s == NonbasicAt::kLower) worst = std::max(worst, -d);
      if (s == NonbasicAt::kUpper) worst = std::max(worst, d);
      if (s == NonbasicAt::kZero) worst = std::max(worst, std::abs(d));
    }
    return worst;
  }

  SimplexOptions options_;
  int num_struct_ = 0;
  int num_rows_ = 0;
  int num_cols_ = 0;
  RowMatrix a_full_;
  RowMatrix tableau_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd reduced_;
  std::vector<double> model_cost_;
  std::vector<double> lower_, upper_, cost_, value_;
  std::vector<NonbasicAt> state_;
  std::vector<int> head_;
  int iterations_ = 0;
  int max_iterations_ = 0;
  bool bland_ = false;
};

}  // namespace

LpSolution solve_lp(const LpModel& model, const SimplexOptions& options) {
  return DenseSimplex(model, {}, options).solve();
}

LpSolution solve_lp_with(const LpModel& model,
                         std::span<const Constraint> extra_rows,
                         const SimplexOptions& options) {
  return DenseSimplex(model, extra_rows, options).solve();
}

}  // namespace varlpec::lp
