// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "test_support.hpp"
#include "varlpec/branch_cut.hpp"
#include "varlpec/cvar.hpp"
#include "varlpec/lower_bound.hpp"
#include "varlpec/report.hpp"
#include "varlpec/smoothing.hpp"
#include "varlpec/upper_bound.hpp"

namespace {

using namespace varlpec;
using Clock = std::chrono::steady_clock;

constexpr double kPaperTol = 5e-4;   // values printed with four decimals
constexpr double kRootTol = 5e-3;    // values printed with two decimals
constexpr double kCutTol = 0.05;     // value printed with one decimal
constexpr double kGapTol = 1e-6;
constexpr double kOracleTol = 1e-7;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    expect(std::abs(got - want) <= tol, what + " = " + std::to_string(got));
  }
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

Check criterion1() {
  Check c;
  const auto t0 = Clock::now();
  const Instance inst = prepare(paper_instance(0.9));
  const CvarSolution s = minimize_cvar(inst);
  const double var = var_of(inst, s.x);
  const double dt = seconds_since(t0);
  c.near(s.cvar, 5.0644, kPaperTol, "CVaR");
  c.near(var, 4.8613, kPaperTol, "least-element VaR");
  c.expect(dt < 1.0, "runtime < 1 s");
  c.detail << " cvar=" << s.cvar << " var=" << var;
  return c;
}

Check criterion2() {
  Check c;
  const Instance inst = prepare(paper_instance(0.9));
  const UpperBoundTrace t = improve(inst, minimize_cvar(inst).x);
  c.near(t.m_ub, 4.2652, kPaperTol, "m_UB");
  const std::vector<int> ft = {0, 9}, es = {0, 1, 9};
  const PieceSolution alt = restricted_lp(inst, PieceSpec::from_sets(27, ft, es));
  c.expect(!alt.optimal() || alt.m >= 4.2652 - kPaperTol, "alternative piece does not improve");
  c.detail << " m_ub=" << t.m_ub << " alternative=" << alt.m;
  return c;
}

Check criterion3() {
  Check c;
  double z[2], h[2];
  const double betas[2] = {0.9, 0.8};
  for (int b = 0; b < 2; ++b) {
    const Instance inst = prepare(paper_instance(betas[b]));
    z[b] = solve_relax(z_relax_model(inst, MSign::kNonNeg), inst).value;
    h[b] = solve_relax(hull_relax_model(inst, hull_bounds(inst)), inst).value;
  }
  c.near(z[0], 3.48, kRootTol, "zsub beta=0.9");
  c.near(z[1], 0.61, kRootTol, "zsub beta=0.8");
  c.near(h[0], 2.45, kRootTol, "hull beta=0.9");
  c.near(h[1], 1.24, kRootTol, "hull beta=0.8");
  c.expect(z[0] > h[0] && h[1] > z[1], "neither relaxation dominates");
  c.detail << " zsub=(" << z[0] << ", " << z[1] << ") hull=(" << h[0] << ", " << h[1] << ")";
  return c;
}

Check criterion4() {
  Check c;
  const Instance inst = prepare(paper_instance(0.9));
  const UpperBoundTrace t = improve(inst, minimize_cvar(inst).x);
  c.expect(solve_relax(z_relax_model(inst, MSign::kNonPos), inst).status ==
               lp::LpStatus::kInfeasible,
           "negative-sign probe infeasible");
  const double cut1 = cut_lp_value(inst, MSign::kNonNeg, {0, CutBranch::kI}).value;
  const double cut3 = cut_lp_value(inst, MSign::kNonNeg, {0, CutBranch::kIII}).value;
  c.near(cut1, 5.3, kCutTol, "cut I at 1");
  c.near(cut3, 5.3, kCutTol, "cut III at 1");

  const Certificate cert = verify_global(inst, t.witness);
  std::vector<std::string> want = {"lambda1 = cap", "lambda2 = cap"};
  for (int i = 3; i <= 27; ++i) want.push_back("tau" + std::to_string(i) + " = 0");
  c.expect(cert.fixings == want, "fixing sequence lambda1, lambda2 at cap then tau3..tau27 = 0");
  int grey_tau = 0;
  for (const TreeNode& n : cert.tree) {
    grey_tau += n.grey && !n.solved && n.label.find("tau") == 0 &&
                n.label.find("> 0") != std::string::npos;
  }
  c.expect(grey_tau == 25, "25 positive-tau siblings eliminated without solving");
  c.expect(cert.status == CertStatus::kCertified, "certified");
  c.near(cert.m_lb, 4.2652, kPaperTol, "final bound");
  c.expect(cert.gap <= kGapTol, "gap <= 1e-6");
  c.expect(cert.lps_solved <= 10, "solved LPs <= 10");
  c.detail << " cuts=(" << cut1 << ", " << cut3 << ") m_lb=" << cert.m_lb
           << " gap=" << cert.gap << " lps=" << cert.lps_solved
           << " eliminated=" << cert.lps_eliminated;
  return c;
}

Check criterion5() {
  Check c;
  const Instance inst = prepare(paper_instance(0.8));
  const LpecPoint cand = point_from_portfolio(inst, minimize_cvar(inst).x);
  const Certificate cert = verify_global(inst, cand);
  c.expect(cert.status == CertStatus::kCertified, "certified");
  c.expect(cert.m_ub == cand.m, "no upper-bound refinement");
  c.detail << " m=" << cand.m << " m_lb=" << cert.m_lb << " family="
           << family_name(cert.family) << " lps=" << cert.lps_solved;
  return c;
}

Check criterion6() {
  Check c;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int done = 0;
  for (std::uint64_t seed = 1; done < 20; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    const int n = 1 + static_cast<int>((seed / 4) % 3);
    const Instance inst = prepare(random_instance(7000 + seed, n, k));
    const PieceEnumeration e = enumerate_pieces(inst);
    const Certificate cert = solve_global(inst);
    c.expect(cert.status == CertStatus::kCertified, "certified seed " + std::to_string(seed));
    worst = std::max(worst, std::abs(cert.m_ub - e.value));
    ++done;
  }
  const double dt = seconds_since(t0);
  c.expect(worst <= kOracleTol, "max |solve - enumerate| <= 1e-7");
  c.expect(dt < 30.0, "runtime < 30 s");
  c.detail << " instances=" << done << " max_diff=" << worst;
  return c;
}

// Each suite runs at least 100 cases.
Check criterion7() {
  Check c;
  std::mt19937_64 rng(77);
  int cases[6] = {};
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    const Instance inst = prepare(random_instance(9000 + seed, 1 + seed % 3, 2 + seed % 3));
    const std::vector<double> x = testing::random_point(inst, rng);
    const double cv = cvar_of(inst, x);
    c.expect(cv >= var_of(inst, x) - 1e-9, "CVaR >= VaR");
    ++cases[0];
    c.expect(std::abs(cv - testing::cvar_lp_oracle(inst, x)) <= 1e-8, "knapsack = LP");
    ++cases[1];

    const LpecPoint p = point_from_portfolio(inst, x);
    const PieceEnumeration e = enumerate_pieces(inst);
    for (const LpecPoint* q : {&p, &e.witness}) {
      double below = 0.0, upto = 0.0;
      bool tau_ok = true;
      for (int i = 0; i < inst.k; ++i) {
        const double l = inst.loss(i, q->x);
        tau_ok = tau_ok && std::abs(q->tau[i] - std::max(0.0, l - q->m)) <= 1e-7;
        if (l < q->m - 1e-7) below += inst.probs[i];
        if (l <= q->m + 1e-7) upto += inst.probs[i];
      }
      c.expect(tau_ok, "tau = (x.y - m)+");
      c.expect(below <= inst.beta + 1e-9 && upto >= inst.beta - 1e-9, "quantile sandwich");
    }
    ++cases[2];
    ++cases[3];

    const HullBounds hb = hull_bounds(inst);
    for (int i = 0; i < inst.k; ++i) {
      const double lam = inst.cap(i) * std::uniform_real_distribution<double>(0, 1)(rng);
      const double gam = hb.L[i] + (hb.U[i] - hb.L[i]) * std::uniform_real_distribution<double>(0, 1)(rng);
      const double w = gam * lam;
      const double cap = inst.cap(i), L = hb.L[i], U = hb.U[i];
      c.expect(w >= L * lam - 1e-9 && w >= cap * gam + U * lam - cap * U - 1e-9 &&
                   w <= U * lam + 1e-9 && w <= cap * gam + L * lam - cap * L + 1e-9,
               "McCormick envelope");
    }
    ++cases[4];

    // z^i = lambda_i x maps the witness into the relaxation of its sign.
    const LpecPoint& q = e.witness;
    const RelaxModel z = z_relax_model(inst, q.m >= 0 ? MSign::kNonNeg : MSign::kNonPos);
    std::vector<double> v(z.model.num_variables(), 0.0);
    v[z.m] = q.m;
    for (int i = 0; i < inst.k; ++i) {
      v[z.tau[i]] = q.tau[i];
      for (int j = 0; j < inst.n; ++j) v[z.z[i][j]] = q.lambda[i] * q.x[j];
    }
    double worst = 0.0;
    for (const lp::Constraint& row : z.model.constraints()) {
      double a = 0.0;
      for (const lp::Term& t : row.terms) a += t.coef * v[t.var];
      if (row.relation == lp::Relation::kLessEqual) worst = std::max(worst, a - row.rhs);
      if (row.relation == lp::Relation::kGreaterEqual) worst = std::max(worst, row.rhs - a);
      if (row.relation == lp::Relation::kEqual) worst = std::max(worst, std::abs(a - row.rhs));
    }
    for (int j = 0; j < z.model.num_variables(); ++j) {
      worst = std::max({worst, z.model.variable(j).lower - v[j], v[j] - z.model.variable(j).upper});
    }
    c.expect(worst <= 1e-7, "relaxation soundness");
    ++cases[5];
  }
  c.detail << " cases=";
  for (int n : cases) {
    c.expect(n >= 100, "at least 100 cases");
    c.detail << n << ' ';
  }
  return c;
}

Check criterion8() {
  Check c;
  double worst_rho = 0.0;
  for (SmoothFn fn : {SmoothFn::kLogExp, SmoothFn::kSqrtHyperbola}) {
    for (double eps : {1e-1, 1e-3, 1e-6}) {
      const SmoothKind kind{fn, eps};
      for (int s = -100000; s <= 100000; ++s) {
        const double t = s * 1e-3;
        worst_rho = std::max(worst_rho, std::abs(std::max(t, 0.0) - rho(kind, t)) / (kind.c() * eps));
      }
    }
  }
  c.expect(worst_rho <= 1.0 + 1e-12, "|t+ - rho| <= c eps");

  std::mt19937_64 rng(88);
  double worst_res = 0.0, worst_grad = 0.0;
  for (int p = 0; p < 50; ++p) {
    const Instance inst = prepare(random_instance(11000 + p, 1 + p % 3, 3 + p % 5));
    const std::vector<double> x = testing::random_point(inst, rng);
    const SmoothKind kind{p % 2 ? SmoothFn::kLogExp : SmoothFn::kSqrtHyperbola, 1e-1};
    worst_res = std::max(worst_res, smoothed_var_info(inst, kind, x).residual);
    const std::vector<double> g = smoothed_var_grad(inst, kind, x);
    double scale = 1.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    for (int j = 0; j < inst.n; ++j) {
      std::vector<double> a = x, b = x;
      a[j] += 1e-5;
      b[j] -= 1e-5;
      const double fd = (smoothed_var(inst, kind, a) - smoothed_var(inst, kind, b)) / 2e-5;
      worst_grad = std::max(worst_grad, std::abs(g[j] - fd) / scale);
    }
  }
  c.expect(worst_res <= 1e-10, "root residual <= 1e-10");
  c.expect(worst_grad <= 1e-4, "gradient vs central differences <= 1e-4");

  const Instance inst = prepare(paper_instance(0.9));
  const SmoothResult r = smooth_minimize(inst, minimize_cvar(inst).x);
  const bool global = r.m <= 4.27;
  c.expect(global || r.stationarity <= 1e-7, "continuation reaches <= 4.27 or stalls at a stationary point");
  c.detail << " rho_ratio=" << worst_rho << " residual=" << worst_res << " grad_err=" << worst_grad
           << " smoothed_m=" << r.m << (global ? "" : " NotGlobal") << " fw_gap=" << r.stationarity;
  return c;
}

std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(VARLPEC_CLI) + " " + args + " 2>&1";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return "<popen failed>";
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  out += "\nexit=" + std::to_string(pclose(pipe));
  return out;
}

Check criterion9() {
  Check c;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "varlpec_acceptance";
  fs::create_directories(dir);
  const std::string paper = (dir / "paper.json").string();
  const std::string rnd = (dir / "random.json").string();
  const std::string cand = (dir / "cand.json").string();
  const std::string g1 = run_cli("gen-paper-instance --out " + paper);
  const std::string r1 = run_cli("gen-paper-instance --seed 5 --random-k 4 --random-n 2");
  c.expect(r1 == run_cli("gen-paper-instance --seed 5 --random-k 4 --random-n 2"),
           "seeded generator");
  run_cli("gen-paper-instance --seed 5 --random-k 4 --random-n 2 --out " + rnd);
  std::ofstream(cand) << "{\"x\": [0.25869565217391305, 0.55652173913043479, 0.18478260869565216]}";
  int commands = 0;
  const std::vector<std::string> cmds = {
      "validate --instance I",
      "cvar-min --instance I",
      "var-eval --instance I --candidate " + cand,
      "upper-bound --instance I",
      "lower-bound --instance I",
      "verify --instance I --candidate " + cand,
      "verify --relax hull --instance I --candidate " + cand,
      "solve --instance I",
      "smooth --instance I",
      "smooth --kind logexp --instance I"};
  for (const std::string& tmpl : cmds) {
    for (const std::string& inst : {paper, rnd}) {
      if (inst == rnd && tmpl.find("candidate") != std::string::npos) continue;
      std::string cmd = tmpl;
      cmd.replace(cmd.find(" I"), 2, " " + inst);
      const std::string a = run_cli(cmd);
      c.expect(a == run_cli(cmd), "byte-identical: " + cmd);
      ++commands;
    }
  }
  fs::remove_all(dir);
  c.detail << " commands=" << commands;
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria = {
      {"1 cvar-min on the paper instance", criterion1},
      {"2 upper-bound improvement", criterion2},
      {"3 root relaxation values", criterion3},
      {"4 sign probe, cuts and fixing rounds", criterion4},
      {"5 beta=0.8 certification of the CVaR candidate", criterion5},
      {"6 solve_global vs piece enumeration", criterion6},
      {"7 property suites", criterion7},
      {"8 smoothing", criterion8},
      {"9 determinism", criterion9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %s:%s\n", c.ok ? "PASS" : "FAIL", name, c.detail.str().c_str());
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
