#include <algorithm>
#include <cmath>
#include <ostream>

#include "varlpec/errors.hpp"
#include "varlpec/lp.hpp"

namespace varlpec::lp {

const char* status_name(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "Optimal";
    case LpStatus::kInfeasible: return "Infeasible";
    case LpStatus::kUnbounded: return "Unbounded";
  }
  return "Unknown";
}

int LpModel::add_variable(std::string name, double lower, double upper,
                          double cost) {
  vars_.push_back({std::move(name), lower, upper});
  costs_.push_back(cost);
  return static_cast<int>(vars_.size()) - 1;
}

void LpModel::set_cost(int var, double cost) { costs_.at(var) = cost; }

void LpModel::set_bounds(int var, double lower, double upper) {
  Variable& v = vars_.at(var);
  v.lower = lower;
  v.upper = upper;
}

namespace {

std::vector<Term> merge_terms(std::vector<Term> terms) {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  return merged;
}

}  // namespace

int LpModel::add_constraint(const LinearExpr& expr, Relation relation,
                            double rhs, std::string name) {
  return add_constraint(
      Constraint{merge_terms(expr.terms()), relation, rhs, std::move(name)});
}

int LpModel::add_constraint(Constraint row) {
  row.terms = merge_terms(std::move(row.terms));
  for (const Term& t : row.terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw Error(ErrorCode::kInvalidModel,
                  "constraint references unknown variable " +
                      std::to_string(t.var));
    }
  }
  rows_.push_back(std::move(row));
  return static_cast<int>(rows_.size()) - 1;
}

std::vector<double> LpModel::dense_row(int i) const {
  std::vector<double> dense(vars_.size(), 0.0);
  for (const Term& t : rows_.at(i).terms) dense[t.var] = t.coef;
  return dense;
}

void LpModel::check() const {
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const Variable& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper ||
        v.lower == kInfinity || v.upper == -kInfinity) {
      throw Error(ErrorCode::kInvalidModel,
                  "bad bounds on variable '" + v.name + "'");
    }
    if (!std::isfinite(costs_[j])) {
      throw Error(ErrorCode::kInvalidModel,
                  "non-finite cost on variable '" + v.name + "'");
    }
  }
  for (const Constraint& row : rows_) {
    if (!std::isfinite(row.rhs)) {
      throw Error(ErrorCode::kInvalidModel, "non-finite rhs in row '" +
                                                row.name + "'");
    }
    for (const Term& t : row.terms) {
      if (t.var < 0 || t.var >= num_variables() || !std::isfinite(t.coef)) {
        throw Error(ErrorCode::kInvalidModel, "bad term in row '" +
                                                  row.name + "'");
      }
    }
  }
}

namespace {

void write_number(std::ostream& out, double v) {
  if (v == kInfinity) {
    out << "+inf";
  } else if (v == -kInfinity) {
    out << "-inf";
  } else {
    out << v;
  }
}

std::string var_label(const LpModel& model, int j) {
  const std::string& name = model.variable(j).name;
  return name.empty() ? "v" + std::to_string(j) : name;
}

void write_terms(std::ostream& out, const LpModel& model,
                 const std::vector<Term>& terms) {
  if (terms.empty()) out << " 0 " << var_label(model, 0);
  for (const Term& t : terms) {
    out << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' '
        << var_label(model, t.var);
  }
}

}  // namespace

void write_lp_listing(const LpModel& model, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "\\ " << model.num_variables() << " variables, "
      << model.num_constraints() << " constraints\n";
  out << "Minimize\n obj:";
  std::vector<Term> objective;
  for (int j = 0; j < model.num_variables(); ++j) {
    if (model.costs()[j] != 0.0) objective.push_back({j, model.costs()[j]});
  }
  write_terms(out, model, objective);
  out << "\nSubject To\n";
  for (int i = 0; i < model.num_constraints(); ++i) {
    const Constraint& row = model.constraints()[i];
    out << ' ' << (row.name.empty() ? "c" + std::to_string(i) : row.name)
        << ':';
    write_terms(out, model, row.terms);
    switch (row.relation) {
      case Relation::kLessEqual: out << " <= "; break;
      case Relation::kEqual: out << " = "; break;
      case Relation::kGreaterEqual: out << " >= "; break;
    }
    write_number(out, row.rhs);
    out << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < model.num_variables(); ++j) {
    const Variable& v = model.variable(j);
    out << ' ';
    write_number(out, v.lower);
    out << " <= " << var_label(model, j) << " <= ";
    write_number(out, v.upper);
    out << '\n';
  }
  out << "End\n";
  out.precision(old_precision);
}

}  // namespace varlpec::lp
