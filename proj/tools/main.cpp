// varlpec command-line tool. Every subcommand prints one report (JSON by
// default) to stdout; exit 0 on success, 1 on usage or input errors, 2 on
// solver failures.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "varlpec/branch_cut.hpp"
#include "varlpec/cvar.hpp"
#include "varlpec/lower_bound.hpp"
#include "varlpec/lpec.hpp"
#include "varlpec/report.hpp"
#include "varlpec/scenario_model.hpp"
#include "varlpec/smoothing.hpp"
#include "varlpec/upper_bound.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace varlpec;

struct Common {
  std::string instance_path;
  std::optional<double> beta;
  std::string format = "json";
  int threads = 1;
  bool timings = false;
};

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(num(d));
  return a;
}

Json point_json(const LpecPoint& p) {
  return Json{{"m", num(p.m)}, {"x", vec(p.x)}, {"tau", vec(p.tau)}, {"lambda", vec(p.lambda)}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
}

Instance load_instance(const Common& c) {
  if (c.instance_path.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--instance is required");
  }
  Instance inst = parse_instance(read_file(c.instance_path));
  if (c.beta) inst.beta = *c.beta;
  return inst;
}

void flatten(const Json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  } else {
    out << prefix << " = " << j.dump() << '\n';
  }
}

void emit(const Common& c, const std::string& command, const Instance* inst, Json params,
          Json results, int lp_count, std::chrono::steady_clock::time_point start) {
  Json report;
  report["command"] = command;
  if (inst) report["instance_digest"] = digest(*inst);
  report["parameters"] = std::move(params);
  report["results"] = std::move(results);
  report["lp_count"] = lp_count;
  if (c.timings) {
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (c.format == "text") {
    flatten(report, "", std::cout);
  } else {
    std::cout << report.dump(2) << '\n';
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidArgument, "bad number '" + item + "' in list");
    }
  }
  return out;
}

RelaxChoice parse_relax(const std::string& s) {
  if (s == "zsub") return RelaxChoice::kZSubstitution;
  if (s == "hull") return RelaxChoice::kConvexHull;
  return RelaxChoice::kAuto;
}

Json certificate_results(const Certificate& cert) {
  Json j = Json::parse(certificate_to_json(cert, true));
  return j;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kBadProbabilities:
    case ErrorCode::kBadDimensions:
    case ErrorCode::kBadBeta:
    case ErrorCode::kParseError:
    case ErrorCode::kIoError:
    case ErrorCode::kMissingAbsBound:
    case ErrorCode::kTooLarge:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global minimum Value-at-Risk via LPEC bounds and branch-and-cut"};
  app.require_subcommand(1);
  Common c;
  const auto start = std::chrono::steady_clock::now();

  auto add_common = [&](CLI::App* sub, bool needs_instance) {
    auto* opt = sub->add_option("--instance", c.instance_path, "Instance JSON file");
    if (needs_instance) opt->required();
    sub->add_option("--beta", c.beta, "Override the confidence level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--threads", c.threads, "Workers for independent LP sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--timings", c.timings, "Include wall time in the report");
  };

  // gen-paper-instance
  auto* gen = app.add_subcommand("gen-paper-instance", "Write the 3x27 example or a random instance");
  double gen_beta = 0.9;
  std::optional<std::uint64_t> seed;
  int random_k = 8;
  int random_n = 3;
  std::string out_path;
  gen->add_option("--beta", gen_beta, "Confidence level")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", seed, "Generate a random instance from this seed instead");
  gen->add_option("--random-k", random_k, "Scenarios of the random instance")->check(CLI::PositiveNumber);
  gen->add_option("--random-n", random_n, "Assets of the random instance")->check(CLI::PositiveNumber);
  gen->add_option("--out", out_path, "Write to a file instead of stdout");

  auto* val = app.add_subcommand("validate", "Check instance invariants and probe X");
  add_common(val, true);

  auto* cvar = app.add_subcommand("cvar-min", "Minimise CVaR and report the least-element VaR");
  add_common(cvar, true);

  auto* vareval = app.add_subcommand("var-eval", "Evaluate VaR and CVaR at a portfolio");
  add_common(vareval, true);
  std::string x_list;
  std::string candidate_path;
  auto* x_opt = vareval->add_option("--x", x_list, "Comma separated portfolio");
  vareval->add_option("--candidate", candidate_path, "Candidate JSON with field x")->excludes(x_opt);

  auto* ub = app.add_subcommand("upper-bound", "Piece-switching upper bound from the CVaR point");
  add_common(ub, true);
  std::string start_path;
  std::string strategy = "auto";
  ub->add_option("--start", start_path, "Candidate JSON to start from (default: CVaR optimum)");
  ub->add_option("--strategy", strategy, "Subset sweep")->check(CLI::IsMember({"auto", "full", "pairs"}));

  auto* lb = app.add_subcommand("lower-bound", "Root relaxations and the cut sweep bound");
  add_common(lb, true);
  std::string csv_path;
  lb->add_option("--csv", csv_path, "Write the cut sweep as CSV");

  std::string relax = "auto";
  std::string tree_path;
  std::string tree_format = "dot";
  long long budget = 100000;

  auto* ver = app.add_subcommand("verify", "Certify a candidate by fixing rounds");
  add_common(ver, true);
  ver->add_option("--candidate", candidate_path, "Candidate JSON {x, optional m}")->required();
  ver->add_option("--relax", relax, "Relaxation family")->check(CLI::IsMember({"auto", "zsub", "hull"}));
  ver->add_option("--tree", tree_path, "Write the tree to this file");
  ver->add_option("--tree-format", tree_format, "Tree file format")->check(CLI::IsMember({"dot", "text"}));

  auto* sol = app.add_subcommand("solve", "Branch and bound to a certified global minimum");
  add_common(sol, true);
  sol->add_option("--relax", relax, "Relaxation family")->check(CLI::IsMember({"auto", "zsub", "hull"}));
  sol->add_option("--budget", budget, "Node cap")->check(CLI::PositiveNumber);
  sol->add_option("--tree", tree_path, "Write the tree to this file");
  sol->add_option("--tree-format", tree_format, "Tree file format")->check(CLI::IsMember({"dot", "text"}));

  auto* sm = app.add_subcommand("smooth", "Smoothed VaR descent with epsilon continuation");
  add_common(sm, true);
  std::string epsilon_list;
  std::string kind = "sqrt";
  int max_iter = 5000;
  sm->add_option("--epsilon", epsilon_list, "Continuation schedule, comma separated (default 0.1,0.01,0.001)");
  sm->add_option("--kind", kind, "Smoothing function")->check(CLI::IsMember({"sqrt", "logexp"}));
  sm->add_option("--start", start_path, "Candidate JSON to start from (default: CVaR optimum)");
  sm->add_option("--max-iter", max_iter, "Frank-Wolfe iterations per stage")->check(CLI::PositiveNumber);

  auto* ex = app.add_subcommand("export-tree", "Convert the tree of a verify/solve report");
  std::string report_path;
  ex->add_option("--report", report_path, "JSON report from verify or solve")->required();
  ex->add_option("--tree-format", tree_format, "Output format")->check(CLI::IsMember({"dot", "text"}));
  ex->add_option("--out", out_path, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const Instance inst = seed ? random_instance(*seed, random_n, random_k) : paper_instance(gen_beta);
      const std::string text = to_text(inst);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_file(out_path, text);
      }
      return 0;
    }

    if (ex->parsed()) {
      const Json report = Json::parse(read_file(report_path));
      const Json* results = report.contains("results") ? &report["results"] : &report;
      if (!results->contains("tree")) {
        throw Error(ErrorCode::kParseError, "report has no 'tree' field");
      }
      Certificate cert;
      for (const Json& e : (*results)["tree"]) {
        TreeNode n;
        n.id = e.at("id").get<int>();
        n.parent = e.at("parent").get<int>();
        n.label = e.at("label").get<std::string>();
        n.solved = e.at("solved").get<bool>();
        n.grey = e.at("grey").get<bool>();
        const std::string st = e.at("status").get<std::string>();
        n.status = st == "Optimal" ? lp::LpStatus::kOptimal
                   : st == "Unbounded" ? lp::LpStatus::kUnbounded
                                       : lp::LpStatus::kInfeasible;
        n.bound = e.at("bound").is_null() ? lp::kInfinity : e.at("bound").get<double>();
        const std::string f = e.at("fathom").get<std::string>();
        for (FathomReason r : {FathomReason::kNone, FathomReason::kBoundDominated,
                               FathomReason::kInfeasible, FathomReason::kIntegralPiece}) {
          if (f == fathom_name(r)) n.fathom = r;
        }
        cert.tree.push_back(std::move(n));
      }
      const std::string text =
          export_tree(cert, tree_format == "text" ? TreeFormat::kText : TreeFormat::kDot);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_file(out_path, text);
      }
      return 0;
    }

    const Instance raw = load_instance(c);
    Json params;
    if (c.beta) params["beta"] = *c.beta;
    params["threads"] = c.threads;

    if (val->parsed()) {
      const ValidationReport rep = validate(raw);
      Json issues = Json::array();
      for (const ValidationIssue& is : rep.issues) {
        issues.push_back({{"code", std::string(error_code_name(is.code))}, {"message", is.message}});
      }
      Json results{{"ok", rep.ok()},
                   {"n", raw.n},
                   {"k", raw.k},
                   {"beta", raw.beta},
                   {"issues", issues},
                   {"coord_min", vec(rep.coord_min)},
                   {"coord_max", vec(rep.coord_max)},
                   {"abs_bound", vec(rep.abs_bound)}};
      emit(c, "validate", &raw, params, results, rep.lps_solved, start);
      return rep.ok() ? 0 : 1;
    }

    const Instance inst = prepare(raw);

    if (cvar->parsed()) {
      const CvarSolution s = minimize_cvar(inst);
      const LpecPoint pt = point_from_portfolio(inst, s.x);
      Json results{{"cvar", s.cvar},
                   {"m", s.m},
                   {"x", vec(s.x)},
                   {"var", var_of(inst, s.x)},
                   {"var_upper", var_upper_of(inst, s.x)},
                   {"cvar_check", cvar_of(inst, s.x)},
                   {"point", point_json(pt)}};
      emit(c, "cvar-min", &inst, params, results, 3, start);
      return 0;
    }

    if (vareval->parsed()) {
      std::vector<double> x;
      if (!x_list.empty()) {
        x = parse_list(x_list);
      } else if (!candidate_path.empty()) {
        x = parse_candidate(read_file(candidate_path)).x;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "give --x or --candidate");
      }
      if (static_cast<int>(x.size()) != inst.n) {
        throw Error(ErrorCode::kBadDimensions, "portfolio has " + std::to_string(x.size()) +
                                                   " entries, expected n=" + std::to_string(inst.n));
      }
      params["x"] = vec(x);
      Json results{{"var", var_of(inst, x)},
                   {"var_upper", var_upper_of(inst, x)},
                   {"cvar", cvar_of(inst, x)},
                   {"losses", vec(inst.losses_at(x))}};
      emit(c, "var-eval", &inst, params, results, 2, start);
      return 0;
    }

    auto start_x = [&](int& lps) {
      if (!start_path.empty()) {
        params["start"] = start_path;
        return candidate_point(inst, parse_candidate(read_file(start_path))).x;
      }
      ++lps;
      return minimize_cvar(inst).x;
    };

    if (ub->parsed()) {
      int lps = 0;
      const std::vector<double> x0 = start_x(lps);
      ImproveOptions io;
      io.threads = c.threads;
      io.strategy = strategy == "full"    ? SweepStrategy::kFullSubsets
                    : strategy == "pairs" ? SweepStrategy::kSingletonsThenPairs
                                          : SweepStrategy::kAuto;
      params["strategy"] = strategy;
      const UpperBoundTrace t = improve(inst, x0, io);
      Json steps = Json::array();
      for (const UpperBoundStep& s : t.steps) {
        Json ft = Json::array();
        Json es = Json::array();
        for (int i = 0; i < inst.k; ++i) {
          if (s.piece.free_tau[i]) ft.push_back(i + 1);
          if (s.piece.eq_s[i]) es.push_back(i + 1);
        }
        steps.push_back({{"sweep", s.sweep},
                         {"free_tau", ft},
                         {"eq_s", es},
                         {"status", lp::status_name(s.status)},
                         {"lp_value", num(s.lp_value)},
                         {"refreshed", num(s.refreshed)},
                         {"accepted", s.accepted}});
      }
      const Residuals r = residuals(inst, t.witness);
      Json results{{"m0", t.m0},
                   {"m_ub", t.m_ub},
                   {"x_ub", vec(t.x_ub)},
                   {"sweeps", t.sweeps},
                   {"witness", point_json(t.witness)},
                   {"feasibility_residual", r.feasibility},
                   {"complementarity_gap", r.complementarity},
                   {"steps", steps}};
      emit(c, "upper-bound", &inst, params, results, lps + t.lps_solved, start);
      return 0;
    }

    if (lb->parsed()) {
      RelaxModel zp = z_relax_model(inst, MSign::kNonNeg);
      RelaxModel zn = z_relax_model(inst, MSign::kNonPos);
      const RelaxSolution sp = solve_relax(zp, inst);
      const RelaxSolution sn = solve_relax(zn, inst);
      const HullBounds hb = hull_bounds(inst, c.threads);
      const RelaxSolution sh = solve_relax(hull_relax_model(inst, hb), inst);
      const CorollaryResult cor = corollary_bound(inst, c.threads);
      const LowerBoundWitness w = min_var_exists_check(inst);
      if (!csv_path.empty()) {
        std::ostringstream csv;
        write_cut_csv(cor.records, csv);
        write_file(csv_path, csv.str());
        params["csv"] = csv_path;
      }
      Json results{
          {"zsub_nonneg", {{"status", lp::status_name(sp.status)}, {"value", num(sp.value)}}},
          {"zsub_nonpos", {{"status", lp::status_name(sn.status)}, {"value", num(sn.value)}}},
          {"hull", {{"status", lp::status_name(sh.status)}, {"value", num(sh.value)}}},
          {"hull_L", vec(hb.L)},
          {"hull_U", vec(hb.U)},
          {"corollary", {{"value", num(cor.value)},
                         {"nonneg", num(cor.nonneg_value)},
                         {"nonpos", num(cor.nonpos_value)}}},
          {"scenario_floor", {{"value", w.value}, {"scenario", w.scenario + 1}}}};
      emit(c, "lower-bound", &inst, params, results,
           3 + hb.lps_solved + cor.lps_solved + w.lps_solved, start);
      return 0;
    }

    SearchOptions so;
    so.relax = parse_relax(relax);
    so.budget = budget;
    so.threads = c.threads;
    auto write_tree = [&](const Certificate& cert) {
      if (tree_path.empty()) return;
      write_file(tree_path,
                 export_tree(cert, tree_format == "text" ? TreeFormat::kText : TreeFormat::kDot));
    };

    if (ver->parsed()) {
      const LpecPoint cand = candidate_point(inst, parse_candidate(read_file(candidate_path)));
      params["relax"] = relax;
      params["candidate"] = candidate_path;
      const Certificate cert = verify_global(inst, cand, so);
      write_tree(cert);
      emit(c, "verify", &inst, params, certificate_results(cert), cert.lps_solved, start);
      return 0;
    }

    if (sol->parsed()) {
      params["relax"] = relax;
      params["budget"] = budget;
      const Certificate cert = solve_global(inst, so);
      write_tree(cert);
      emit(c, "solve", &inst, params, certificate_results(cert), cert.lps_solved, start);
      return cert.status == CertStatus::kCertified ? 0 : 2;
    }

    if (sm->parsed()) {
      int lps = 0;
      const std::vector<double> x0 = start_x(lps);
      SmoothOptions opts;
      opts.fn = kind == "logexp" ? SmoothFn::kLogExp : SmoothFn::kSqrtHyperbola;
      if (!epsilon_list.empty()) opts.schedule = parse_list(epsilon_list);
      for (double e : opts.schedule) {
        if (!(e > 0)) throw Error(ErrorCode::kInvalidArgument, "epsilon values must be positive");
      }
      opts.max_iterations = max_iter;
      params["kind"] = kind;
      params["epsilon"] = vec(opts.schedule);
      const SmoothResult r = smooth_minimize(inst, x0, opts);
      Json stages = Json::array();
      for (const SmoothStage& s : r.stages) {
        stages.push_back({{"epsilon", s.epsilon},
                          {"m", s.m},
                          {"gap", s.gap},
                          {"iterations", s.iterations},
                          {"converged", s.converged}});
      }
      Json results{{"m", r.m},
                   {"x", vec(r.x)},
                   {"grad", vec(r.grad)},
                   {"stationarity", r.stationarity},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"var", r.var_exact},
                   {"var_upper", r.var_upper},
                   {"singleton_argmin", r.singleton_argmin},
                   {"stages", stages}};
      emit(c, "smooth", &inst, params, results, lps + r.lps_solved, start);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
