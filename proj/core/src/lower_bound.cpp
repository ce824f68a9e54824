#include "varlpec/lower_bound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "varlpec/parallel.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LinearExpr;
using lp::LpModel;
using lp::LpStatus;
using lp::Relation;

const char* family_name(RelaxFamily family) {
  return family == RelaxFamily::kZSubstitution ? "zsub" : "hull";
}

const char* sign_name(MSign sign) { return sign == MSign::kNonNeg ? "nonneg" : "nonpos"; }

const char* branch_name(CutBranch branch) {
  switch (branch) {
    case CutBranch::kI: return "I";
    case CutBranch::kII: return "II";
    case CutBranch::kIII: return "III";
  }
  return "?";
}

namespace {

std::string idx(const char* base, int i) { return base + std::to_string(i + 1); }

std::string idx(const char* base, int i, int j) {
  return base + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

// m + tau_i - x.y^i
LinearExpr slack_expr(const RelaxModel& r, const Instance& inst, int i) {
  LinearExpr s;
  s.add(r.m, 1.0).add(r.tau[i], 1.0);
  for (int j = 0; j < inst.n; ++j) s.add(r.x[j], -inst.losses[i][j]);
  return s;
}

}  // namespace

RelaxModel z_relax_model(const Instance& inst, MSign sign) {
  const bool nonneg = inst.polytope.nonneg();
  if (!nonneg && !inst.polytope.abs_bound) {
    throw Error(ErrorCode::kMissingAbsBound,
                "z-substitution needs |x| <= a on X; run prepare() first");
  }
  RelaxModel r;
  r.kind = {RelaxFamily::kZSubstitution, sign};
  LpModel& model = r.model;
  r.m = model.add_variable("m", -kInfinity, kInfinity, 1.0);
  r.cap.resize(inst.k);
  r.tau.resize(inst.k);
  r.z.assign(inst.k, std::vector<int>(inst.n));
  r.x.assign(inst.n, LinearExpr{});
  for (int i = 0; i < inst.k; ++i) {
    r.cap[i] = inst.cap(i);
    r.tau[i] = model.add_variable(idx("tau", i));
  }
  for (int i = 0; i < inst.k; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      double lo = 0.0;
      double hi = kInfinity;
      if (!nonneg) {
        hi = r.cap[i] * (*inst.polytope.abs_bound)[j];
        lo = -hi;
      }
      r.z[i][j] = model.add_variable(idx("z", i, j), lo, hi);
      r.x[j].add(r.z[i][j], 1.0);
    }
  }
  add_polytope_rows(inst.polytope, r.x, model);

  LinearExpr m_def;
  m_def.add(r.m, -1.0);
  for (int i = 0; i < inst.k; ++i) {
    LinearExpr g;  // z^i.y^i - cap_i tau_i
    for (int j = 0; j < inst.n; ++j) g.add(r.z[i][j], inst.losses[i][j]);
    g.add(r.tau[i], -r.cap[i]);
    m_def.add(g);

    model.add_constraint(slack_expr(r, inst, i), Relation::kGreaterEqual, 0.0, idx("s", i));
    LinearExpr h = g;  // g - cap_i m
    h.add(r.m, -r.cap[i]);
    if (sign == MSign::kNonNeg) {
      model.add_constraint(g, Relation::kGreaterEqual, 0.0, idx("glo", i));
      model.add_constraint(h, Relation::kLessEqual, 0.0, idx("ghi", i));
    } else {
      model.add_constraint(g, Relation::kLessEqual, 0.0, idx("glo", i));
      model.add_constraint(h, Relation::kGreaterEqual, 0.0, idx("ghi", i));
    }
    if (nonneg) {
      for (int j = 0; j < inst.n; ++j) {
        LinearExpr zb;
        zb.add(r.z[i][j], 1.0).add(r.x[j], -r.cap[i]);
        model.add_constraint(zb, Relation::kLessEqual, 0.0, idx("zcap", i, j));
      }
    }
  }
  model.add_constraint(m_def, Relation::kEqual, 0.0, "mdef");
  return r;
}

HullBounds hull_bounds(const Instance& inst, int threads) {
  LpModel base;
  std::vector<int> x(inst.n);
  for (int j = 0; j < inst.n; ++j) x[j] = base.add_variable(idx("x", j), -kInfinity);
  add_polytope_rows(inst.polytope, x, base, false);
  auto solve = [&](std::size_t t) {
    const int i = static_cast<int>(t / 2);
    const double sense = t % 2 == 0 ? 1.0 : -1.0;
    LpModel model = base;
    for (int j = 0; j < inst.n; ++j) model.set_cost(x[j], sense * inst.losses[i][j]);
    const lp::LpSolution sol = lp::solve_lp(model);
    if (sol.status == LpStatus::kInfeasible) {
      throw Error(ErrorCode::kEmptyPolytope, "X is empty");
    }
    if (sol.status == LpStatus::kUnbounded) {
      throw Error(ErrorCode::kUnboundedPolytope, "scenario loss unbounded on X");
    }
    return sense * sol.objective;
  };
  const std::vector<double> vals = parallel_map(2 * static_cast<std::size_t>(inst.k), threads, solve);
  HullBounds b;
  b.L.resize(inst.k);
  b.U.resize(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    b.L[i] = vals[2 * i];
    b.U[i] = std::max(vals[2 * i + 1], b.L[i]);
  }
  b.lps_solved = 2 * inst.k;
  return b;
}

RelaxModel hull_relax_model(const Instance& inst, const HullBounds& bounds) {
  RelaxModel r;
  r.kind = {RelaxFamily::kConvexHull, MSign::kNonNeg};
  LpModel& model = r.model;
  r.m = model.add_variable("m", -kInfinity, kInfinity, 1.0);
  std::vector<int> xcol(inst.n);
  r.x.assign(inst.n, LinearExpr{});
  for (int j = 0; j < inst.n; ++j) {
    xcol[j] = model.add_variable(idx("x", j), -kInfinity);
    r.x[j].add(xcol[j], 1.0);
  }
  add_polytope_rows(inst.polytope, xcol, model, false);
  r.cap.resize(inst.k);
  r.tau.resize(inst.k);
  r.lambda.resize(inst.k);
  r.gamma.resize(inst.k);
  r.w.resize(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    r.cap[i] = inst.cap(i);
    r.tau[i] = model.add_variable(idx("tau", i));
    r.lambda[i] = model.add_variable(idx("lambda", i), 0.0, r.cap[i]);
    r.gamma[i] = model.add_variable(idx("gamma", i), bounds.L[i], bounds.U[i]);
    r.w[i] = model.add_variable(idx("w", i), -kInfinity);
  }
  LinearExpr mass;
  LinearExpr m_def;
  m_def.add(r.m, 1.0);
  for (int i = 0; i < inst.k; ++i) {
    const double L = bounds.L[i];
    const double U = bounds.U[i];
    const double c = r.cap[i];
    LinearExpr g;
    g.add(r.gamma[i], 1.0);
    for (int j = 0; j < inst.n; ++j) g.add(xcol[j], -inst.losses[i][j]);
    model.add_constraint(g, Relation::kEqual, 0.0, idx("gamma", i));
    model.add_constraint(LinearExpr{{r.m, 1.0}, {r.tau[i], 1.0}, {r.gamma[i], -1.0}},
                         Relation::kGreaterEqual, 0.0, idx("s", i));
    // w_i = gamma_i lambda_i over [L, U] x [0, cap].
    model.add_constraint(LinearExpr{{r.w[i], 1.0}, {r.lambda[i], -L}},
                         Relation::kGreaterEqual, 0.0, idx("mc1_", i));
    model.add_constraint(LinearExpr{{r.w[i], 1.0}, {r.gamma[i], -c}, {r.lambda[i], -U}},
                         Relation::kGreaterEqual, -c * U, idx("mc2_", i));
    model.add_constraint(LinearExpr{{r.w[i], 1.0}, {r.lambda[i], -U}},
                         Relation::kLessEqual, 0.0, idx("mc3_", i));
    model.add_constraint(LinearExpr{{r.w[i], 1.0}, {r.gamma[i], -c}, {r.lambda[i], -L}},
                         Relation::kLessEqual, -c * L, idx("mc4_", i));
    mass.add(r.lambda[i], 1.0);
    m_def.add(r.tau[i], c).add(r.w[i], -1.0);
  }
  model.add_constraint(mass, Relation::kEqual, 1.0, "mass");
  model.add_constraint(m_def, Relation::kEqual, 0.0, "mdef");
  return r;
}

void apply_fixings(RelaxModel& r, const Instance& inst, const Fixings& fixings) {
  LpModel& model = r.model;
  auto fix_tau_zero = [&](int i) { model.set_bounds(r.tau[i], 0.0, 0.0); };
  auto fix_s_zero = [&](int i) {
    model.add_constraint(slack_expr(r, inst, i), Relation::kEqual, 0.0, idx("s_eq", i));
  };
  const bool zsub = r.kind.family == RelaxFamily::kZSubstitution;
  for (const CutSpec& cut : fixings.cuts) {
    const int i = cut.i0;
    switch (cut.branch) {
      case CutBranch::kI:
        fix_tau_zero(i);
        if (zsub) {
          for (int j = 0; j < inst.n; ++j) model.set_bounds(r.z[i][j], 0.0, 0.0);
        } else {
          model.set_bounds(r.lambda[i], 0.0, 0.0);
        }
        break;
      case CutBranch::kII:
        fix_s_zero(i);
        if (zsub) {
          for (int j = 0; j < inst.n; ++j) {
            LinearExpr e;
            e.add(r.z[i][j], 1.0).add(r.x[j], -r.cap[i]);
            model.add_constraint(e, Relation::kEqual, 0.0, idx("zfix", i, j));
          }
        } else {
          model.set_bounds(r.lambda[i], r.cap[i], r.cap[i]);
        }
        break;
      case CutBranch::kIII:
        fix_tau_zero(i);
        fix_s_zero(i);
        break;
    }
  }
  for (int i : fixings.tau_zero) fix_tau_zero(i);
}

RelaxSolution solve_relax(const RelaxModel& r, const Instance& inst) {
  const lp::LpSolution sol = lp::solve_lp(r.model);
  RelaxSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status == LpStatus::kUnbounded) out.value = -kInfinity;
  if (!sol.optimal()) return out;
  out.value = sol.objective;
  out.m = sol.x[r.m];
  out.x.assign(inst.n, 0.0);
  for (int j = 0; j < inst.n; ++j) {
    for (const lp::Term& t : r.x[j].terms()) out.x[j] += t.coef * sol.x[t.var];
  }
  out.tau.resize(inst.k);
  for (int i = 0; i < inst.k; ++i) out.tau[i] = sol.x[r.tau[i]];
  out.lambda_hat.assign(inst.k, 0.0);
  if (r.kind.family == RelaxFamily::kConvexHull) {
    for (int i = 0; i < inst.k; ++i) out.lambda_hat[i] = sol.x[r.lambda[i]];
    return out;
  }
  double x_norm = 0.0;
  for (double v : out.x) x_norm += std::abs(v);
  for (int i = 0; i < inst.k; ++i) {
    if (x_norm > 1e-12) {
      double z_norm = 0.0;
      for (int j = 0; j < inst.n; ++j) z_norm += std::abs(sol.x[r.z[i][j]]);
      out.lambda_hat[i] = std::min(z_norm / x_norm, r.cap[i]);
    } else {
      // x = 0 carries no information on lambda; fall back to the slack pattern.
      const double s = out.m + out.tau[i] - inst.loss(i, out.x);
      out.lambda_hat[i] = s <= 1e-9 ? r.cap[i] : 0.0;
    }
  }
  return out;
}

RelaxSolution cut_lp_value(const Instance& inst, MSign sign, const CutSpec& cut,
                           const Fixings& extra) {
  RelaxModel r = z_relax_model(inst, sign);
  Fixings all = extra;
  all.cuts.push_back(cut);
  apply_fixings(r, inst, all);
  return solve_relax(r, inst);
}

CorollaryResult corollary_bound(const Instance& inst, int threads) {
  CorollaryResult out;
  for (MSign sign : {MSign::kNonNeg, MSign::kNonPos}) {
    RelaxModel root = z_relax_model(inst, sign);
    const RelaxSolution rs = solve_relax(root, inst);
    ++out.lps_solved;
    double& root_value = sign == MSign::kNonNeg ? out.nonneg_root : out.nonpos_root;
    double& sign_value = sign == MSign::kNonNeg ? out.nonneg_value : out.nonpos_value;
    root_value = rs.value;
    if (rs.status == LpStatus::kInfeasible) continue;

    auto solve = [&](std::size_t t) {
      const CutSpec cut{static_cast<int>(t / 3), static_cast<CutBranch>(t % 3)};
      const RelaxSolution s = cut_lp_value(inst, sign, cut);
      return CutRecord{cut.i0, cut.branch, sign, s.status, s.value};
    };
    const std::vector<CutRecord> recs =
        parallel_map(3 * static_cast<std::size_t>(inst.k), threads, solve);
    out.lps_solved += static_cast<int>(recs.size());
    double best = -kInfinity;
    for (int j = 0; j < inst.k; ++j) {
      const double v = std::min({recs[3 * j].value, recs[3 * j + 1].value, recs[3 * j + 2].value});
      best = std::max(best, v);
    }
    // The root is itself a bound for this sign.
    sign_value = std::max(best, rs.value);
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  out.value = std::min(out.nonneg_value, out.nonpos_value);
  return out;
}

void write_cut_csv(const std::vector<CutRecord>& records, std::ostream& out) {
  out << "i0,branch,sign,status,value\n";
  char buf[64];
  for (const CutRecord& r : records) {
    out << r.i0 + 1 << ',' << branch_name(r.branch) << ',' << sign_name(r.sign) << ','
        << lp::status_name(r.status) << ',';
    if (std::isfinite(r.value)) {
      std::snprintf(buf, sizeof buf, "%.12g", r.value);
      out << buf;
    } else {
      out << (r.value > 0 ? "inf" : "-inf");
    }
    out << '\n';
  }
}

}  // namespace varlpec
