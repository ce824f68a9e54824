#include "varlpec/scenario_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LinearExpr;
using lp::LpModel;
using lp::LpStatus;
using lp::Relation;

bool Polytope::nonneg() const {
  return !lower.empty() &&
         std::all_of(lower.begin(), lower.end(), [](double v) { return v >= 0.0; });
}

double Instance::loss(int i, std::span<const double> x) const {
  const std::vector<double>& y = losses[i];
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += x[j] * y[j];
  return acc;
}

std::vector<double> Instance::losses_at(std::span<const double> x) const {
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) out[i] = loss(i, x);
  return out;
}

bool ValidationReport::has(ErrorCode code) const {
  return std::any_of(issues.begin(), issues.end(),
                     [code](const ValidationIssue& v) { return v.code == code; });
}

void add_polytope_rows(const Polytope& poly, std::span<const int> x_vars,
                       LpModel& model, bool bounds_as_rows) {
  const int n = static_cast<int>(x_vars.size());
  auto row_expr = [&](const std::vector<double>& coeffs) {
    LinearExpr e;
    for (int j = 0; j < n; ++j) e.add(x_vars[j], coeffs[j]);
    return e;
  };
  for (const PolyRow& row : poly.eq) {
    model.add_constraint(row_expr(row.coeffs), Relation::kEqual, row.rhs, "X_eq");
  }
  for (const PolyRow& row : poly.ineq) {
    model.add_constraint(row_expr(row.coeffs), Relation::kLessEqual, row.rhs,
                         "X_ineq");
  }
  for (int j = 0; j < n; ++j) {
    const double lo = poly.lower.empty() ? -kInfinity : poly.lower[j];
    const double hi = poly.upper.empty() ? kInfinity : poly.upper[j];
    if (bounds_as_rows) {
      if (std::isfinite(lo)) {
        model.add_constraint(LinearExpr{{x_vars[j], 1.0}},
                             Relation::kGreaterEqual, lo, "X_lo");
      }
      if (std::isfinite(hi)) {
        model.add_constraint(LinearExpr{{x_vars[j], 1.0}},
                             Relation::kLessEqual, hi, "X_hi");
      }
    } else {
      model.set_bounds(x_vars[j], lo, hi);
    }
  }
}

void add_polytope_rows(const Polytope& poly,
                       std::span<const LinearExpr> x_exprs, LpModel& model) {
  const int n = static_cast<int>(x_exprs.size());
  auto row_expr = [&](const std::vector<double>& coeffs) {
    LinearExpr e;
    for (int j = 0; j < n; ++j) e.add(x_exprs[j], coeffs[j]);
    return e;
  };
  for (const PolyRow& row : poly.eq) {
    model.add_constraint(row_expr(row.coeffs), Relation::kEqual, row.rhs, "X_eq");
  }
  for (const PolyRow& row : poly.ineq) {
    model.add_constraint(row_expr(row.coeffs), Relation::kLessEqual, row.rhs,
                         "X_ineq");
  }
  for (int j = 0; j < n; ++j) {
    const double lo = poly.lower.empty() ? -kInfinity : poly.lower[j];
    const double hi = poly.upper.empty() ? kInfinity : poly.upper[j];
    if (std::isfinite(lo)) {
      model.add_constraint(x_exprs[j], Relation::kGreaterEqual, lo, "X_lo");
    }
    if (std::isfinite(hi)) {
      model.add_constraint(x_exprs[j], Relation::kLessEqual, hi, "X_hi");
    }
  }
}

namespace {

void check_dimensions(const Instance& inst, ValidationReport& report) {
  auto issue = [&](ErrorCode code, std::string msg) {
    report.issues.push_back({code, std::move(msg)});
  };
  if (inst.n < 1) issue(ErrorCode::kBadDimensions, "n must be >= 1");
  if (inst.k < 1) issue(ErrorCode::kBadDimensions, "k must be >= 1");
  if (static_cast<int>(inst.probs.size()) != inst.k) {
    issue(ErrorCode::kBadDimensions, "probs has " +
                                         std::to_string(inst.probs.size()) +
                                         " entries, expected k=" +
                                         std::to_string(inst.k));
  }
  if (static_cast<int>(inst.losses.size()) != inst.k) {
    issue(ErrorCode::kBadDimensions, "losses has " +
                                         std::to_string(inst.losses.size()) +
                                         " rows, expected k=" +
                                         std::to_string(inst.k));
  }
  for (std::size_t i = 0; i < inst.losses.size(); ++i) {
    if (static_cast<int>(inst.losses[i].size()) != inst.n) {
      issue(ErrorCode::kBadDimensions,
            "losses row " + std::to_string(i) + " has length " +
                std::to_string(inst.losses[i].size()));
    }
    for (double v : inst.losses[i]) {
      if (!std::isfinite(v)) {
        issue(ErrorCode::kInvalidArgument,
              "losses row " + std::to_string(i) + " is not finite");
        break;
      }
    }
  }
  const Polytope& poly = inst.polytope;
  auto check_rows = [&](const std::vector<PolyRow>& rows, const char* what) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].coeffs.size()) != inst.n) {
        issue(ErrorCode::kBadDimensions, std::string(what) + " row " +
                                             std::to_string(r) +
                                             " has wrong length");
      }
    }
  };
  check_rows(poly.eq, "polytope.eq");
  check_rows(poly.ineq, "polytope.ineq");
  if (static_cast<int>(poly.lower.size()) != inst.n ||
      static_cast<int>(poly.upper.size()) != inst.n) {
    issue(ErrorCode::kBadDimensions, "polytope bounds must have length n");
  }
  if (poly.abs_bound && static_cast<int>(poly.abs_bound->size()) != inst.n) {
    issue(ErrorCode::kBadDimensions, "abs_bound must have length n");
  }
}

}  // namespace

ValidationReport validate(const Instance& inst) {
  ValidationReport report;
  if (!(inst.beta > 0.0 && inst.beta < 1.0)) {
    report.issues.push_back({ErrorCode::kBadBeta, "beta must lie in (0,1)"});
  }
  check_dimensions(inst, report);
  if (report.has(ErrorCode::kBadDimensions)) return report;

  double total = 0.0;
  bool positive = true;
  for (double p : inst.probs) {
    positive = positive && p > 0.0 && std::isfinite(p);
    total += p;
  }
  if (!positive || std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities must be positive and sum to 1 (sum = " << total << ")";
    report.issues.push_back({ErrorCode::kBadProbabilities, msg.str()});
  }

  // Boundedness: min and max of each coordinate over X.
  const int n = inst.n;
  report.coord_min.assign(n, 0.0);
  report.coord_max.assign(n, 0.0);
  report.abs_bound.assign(n, 0.0);
  LpModel base;
  std::vector<int> x(n);
  for (int j = 0; j < n; ++j) x[j] = base.add_variable("x" + std::to_string(j));
  add_polytope_rows(inst.polytope, x, base, false);
  bool unbounded = false;
  for (int j = 0; j < n && !unbounded; ++j) {
    for (int sense : {1, -1}) {
      LpModel model = base;
      model.set_cost(x[j], sense);
      const lp::LpSolution sol = lp::solve_lp(model);
      ++report.lps_solved;
      if (sol.status == LpStatus::kInfeasible) {
        report.issues.push_back({ErrorCode::kEmptyPolytope, "X is empty"});
        return report;
      }
      if (sol.status == LpStatus::kUnbounded) {
        report.issues.push_back(
            {ErrorCode::kUnboundedPolytope,
             "coordinate " + std::to_string(j) + " is unbounded on X"});
        unbounded = true;
        break;
      }
      (sense > 0 ? report.coord_min : report.coord_max)[j] = sol.x[x[j]];
    }
  }
  if (unbounded) return report;
  for (int j = 0; j < n; ++j) {
    report.abs_bound[j] =
        std::max(std::abs(report.coord_min[j]), std::abs(report.coord_max[j]));
  }
  if (inst.polytope.abs_bound) {
    for (int j = 0; j < n; ++j) {
      if ((*inst.polytope.abs_bound)[j] < report.abs_bound[j] - 1e-9) {
        report.issues.push_back(
            {ErrorCode::kInvalidArgument,
             "abs_bound[" + std::to_string(j) + "] does not dominate X"});
      }
    }
  }
  return report;
}

Instance prepare(Instance inst) {
  const ValidationReport report = validate(inst);
  if (!report.ok()) {
    throw Error(report.issues.front().code, report.issues.front().message);
  }
  if (!inst.polytope.abs_bound) inst.polytope.abs_bound = report.abs_bound;
  return inst;
}

Instance paper_instance(double beta) {
  Instance inst;
  inst.n = 3;
  inst.k = 27;
  inst.beta = beta;
  inst.probs.assign(27, 1.0 / 27.0);
  const double d[3][3] = {{5, 0, -6}, {7, 0, -5}, {2, 0, -5}};
  inst.losses.assign(27, std::vector<double>(3, 0.0));
  for (int i1 = 0; i1 < 3; ++i1) {
    for (int i2 = 0; i2 < 3; ++i2) {
      for (int i3 = 0; i3 < 3; ++i3) {
        const int j = 9 * i1 + 3 * i2 + i3;
        inst.losses[j] = {d[0][i1], d[1][i2], d[2][i3]};
      }
    }
  }
  Polytope& poly = inst.polytope;
  poly.eq.push_back({{1.0, 1.0, 1.0}, 1.0});
  // r.x >= f  <=>  -r.x <= -f
  poly.ineq.push_back({{1.0 / 3.0, -2.0 / 3.0, 1.0}, -0.1});
  poly.lower.assign(3, 0.0);
  poly.upper.assign(3, kInfinity);
  return inst;
}

namespace {

// splitmix64: fixed output on every platform.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform integer in [lo, hi].
  int uniform(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(next() % span);
  }

 private:
  std::uint64_t state_;
};

}  // namespace

Instance random_instance(std::uint64_t seed, int n, int k) {
  if (n < 1 || k < 1) {
    throw Error(ErrorCode::kInvalidArgument, "random_instance needs n, k >= 1");
  }
  SplitMix rng(seed);
  Instance inst;
  inst.n = n;
  inst.k = k;
  static constexpr double kBetas[] = {0.5, 0.6, 0.7, 0.75, 0.8, 0.9};
  inst.beta = kBetas[rng.uniform(0, 5)];
  std::vector<int> weights(k);
  for (int& w : weights) w = rng.uniform(1, 4);
  const int total = std::accumulate(weights.begin(), weights.end(), 0);
  inst.probs.resize(k);
  for (int i = 0; i < k; ++i) {
    inst.probs[i] = static_cast<double>(weights[i]) / total;
  }
  // Rounding can leave the sum a few ulps from 1; put the residue on the
  // largest entry so the invariant holds to 1e-12.
  const double sum = std::accumulate(inst.probs.begin(), inst.probs.end(), 0.0);
  *std::max_element(inst.probs.begin(), inst.probs.end()) += 1.0 - sum;

  inst.losses.assign(k, std::vector<double>(n));
  for (auto& row : inst.losses) {
    for (double& v : row) v = rng.uniform(-20, 20) / 4.0;
  }
  Polytope& poly = inst.polytope;
  poly.eq.push_back({std::vector<double>(n, 1.0), 1.0});
  poly.lower.assign(n, 0.0);
  poly.upper.assign(n, kInfinity);
  if (n > 1 && rng.uniform(0, 1) == 1) {
    std::vector<double> r(n);
    for (double& v : r) v = rng.uniform(-4, 4) / 4.0;
    const double lowest = *std::min_element(r.begin(), r.end());
    poly.ineq.push_back({r, lowest + 0.25 * rng.uniform(1, 4)});
  }
  return inst;
}

namespace {

std::string fmt_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt_number(v[i]);
  }
  return out + "]";
}

std::string fmt_rows(const std::vector<PolyRow>& rows) {
  std::string out = "[";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> flat = rows[r].coeffs;
    flat.push_back(rows[r].rhs);
    out += (r ? ",\n      " : "\n      ") + fmt_array(flat);
  }
  return out + (rows.empty() ? "]" : "\n    ]");
}

}  // namespace

std::string to_text(const Instance& inst) {
  std::string out = "{\n";
  out += "  \"n\": " + std::to_string(inst.n) + ",\n";
  out += "  \"k\": " + std::to_string(inst.k) + ",\n";
  out += "  \"beta\": " + fmt_number(inst.beta) + ",\n";
  out += "  \"probs\": " + fmt_array(inst.probs) + ",\n";
  out += "  \"losses\": [";
  for (std::size_t i = 0; i < inst.losses.size(); ++i) {
    out += (i ? ",\n    " : "\n    ") + fmt_array(inst.losses[i]);
  }
  out += inst.losses.empty() ? "],\n" : "\n  ],\n";
  const Polytope& poly = inst.polytope;
  out += "  \"polytope\": {\n";
  out += "    \"eq\": " + fmt_rows(poly.eq) + ",\n";
  out += "    \"ineq\": " + fmt_rows(poly.ineq) + ",\n";
  out += "    \"lower\": " + fmt_array(poly.lower) + ",\n";
  out += "    \"upper\": " + fmt_array(poly.upper);
  if (poly.abs_bound) out += ",\n    \"abs_bound\": " + fmt_array(*poly.abs_bound);
  out += "\n  }\n}\n";
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kParseError, "field '" + field + "': " + msg);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) parse_fail(path + key, "missing");
  return obj.at(key);
}

double number_or_inf(const json& v, const std::string& field, double inf) {
  if (v.is_null()) return inf;
  if (!v.is_number()) parse_fail(field, "expected a number or null");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const std::string& field,
                                 double null_value, bool allow_null) {
  if (!v.is_array()) parse_fail(field, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string sub = field + "[" + std::to_string(i) + "]";
    if (v[i].is_null() && !allow_null) parse_fail(sub, "null not allowed");
    out.push_back(number_or_inf(v[i], sub, null_value));
  }
  return out;
}

std::vector<PolyRow> rows_field(const json& v, const std::string& field, int n) {
  if (!v.is_array()) parse_fail(field, "expected an array of rows");
  std::vector<PolyRow> out;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string sub = field + "[" + std::to_string(r) + "]";
    std::vector<double> flat = number_array(v[r], sub, 0.0, false);
    if (static_cast<int>(flat.size()) != n + 1) {
      parse_fail(sub, "expected n+1 = " + std::to_string(n + 1) + " numbers");
    }
    PolyRow row;
    row.rhs = flat.back();
    flat.pop_back();
    row.coeffs = std::move(flat);
    out.push_back(std::move(row));
  }
  return out;
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError,
                "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  Instance inst;
  const json& n = require(doc, "n", "");
  const json& k = require(doc, "k", "");
  if (!n.is_number_integer() || n.get<int>() < 1) parse_fail("n", "expected a positive integer");
  if (!k.is_number_integer() || k.get<int>() < 1) parse_fail("k", "expected a positive integer");
  inst.n = n.get<int>();
  inst.k = k.get<int>();
  const json& beta = require(doc, "beta", "");
  if (!beta.is_number()) parse_fail("beta", "expected a number");
  inst.beta = beta.get<double>();

  inst.probs = number_array(require(doc, "probs", ""), "probs", 0.0, false);
  if (static_cast<int>(inst.probs.size()) != inst.k) {
    parse_fail("probs", "header k=" + std::to_string(inst.k) + " but " +
                            std::to_string(inst.probs.size()) + " entries");
  }
  const json& losses = require(doc, "losses", "");
  if (!losses.is_array()) parse_fail("losses", "expected an array of rows");
  if (static_cast<int>(losses.size()) != inst.k) {
    parse_fail("losses", "header k=" + std::to_string(inst.k) + " but " +
                             std::to_string(losses.size()) + " rows");
  }
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const std::string sub = "losses[" + std::to_string(i) + "]";
    std::vector<double> row = number_array(losses[i], sub, 0.0, false);
    if (static_cast<int>(row.size()) != inst.n) {
      parse_fail(sub, "header n=" + std::to_string(inst.n) + " but " +
                          std::to_string(row.size()) + " entries");
    }
    inst.losses.push_back(std::move(row));
  }

  const json& poly = require(doc, "polytope", "");
  if (!poly.is_object()) parse_fail("polytope", "expected an object");
  Polytope& X = inst.polytope;
  if (poly.contains("eq")) X.eq = rows_field(poly["eq"], "polytope.eq", inst.n);
  if (poly.contains("ineq")) X.ineq = rows_field(poly["ineq"], "polytope.ineq", inst.n);
  X.lower = poly.contains("lower")
                ? number_array(poly["lower"], "polytope.lower", -kInfinity, true)
                : std::vector<double>(inst.n, -kInfinity);
  X.upper = poly.contains("upper")
                ? number_array(poly["upper"], "polytope.upper", kInfinity, true)
                : std::vector<double>(inst.n, kInfinity);
  if (static_cast<int>(X.lower.size()) != inst.n) parse_fail("polytope.lower", "expected n entries");
  if (static_cast<int>(X.upper.size()) != inst.n) parse_fail("polytope.upper", "expected n entries");
  if (poly.contains("abs_bound")) {
    X.abs_bound = number_array(poly["abs_bound"], "polytope.abs_bound", 0.0, false);
    if (static_cast<int>(X.abs_bound->size()) != inst.n) {
      parse_fail("polytope.abs_bound", "expected n entries");
    }
  }
  return inst;
}

void save(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << to_text(inst);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

Instance load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string digest(const Instance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text(inst)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace varlpec
