#include "varlpec/branch_cut.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <queue>

#include "varlpec/cvar.hpp"
#include "varlpec/upper_bound.hpp"

namespace varlpec {

using lp::kInfinity;
using lp::LpStatus;

const char* lambda_status_name(LambdaStatus s) {
  switch (s) {
    case LambdaStatus::kFree: return "free";
    case LambdaStatus::kZero: return "zero";
    case LambdaStatus::kInterior: return "interior";
    case LambdaStatus::kCap: return "cap";
  }
  return "?";
}

const char* tau_status_name(TauStatus s) {
  switch (s) {
    case TauStatus::kFree: return "free";
    case TauStatus::kZero: return "zero";
    case TauStatus::kPositive: return "positive";
  }
  return "?";
}

const char* sign_state_name(SignState s) {
  switch (s) {
    case SignState::kUnknown: return "unknown";
    case SignState::kNonNeg: return "nonneg";
    case SignState::kNonPos: return "nonpos";
  }
  return "?";
}

const char* fathom_name(FathomReason r) {
  switch (r) {
    case FathomReason::kNone: return "none";
    case FathomReason::kBoundDominated: return "BoundDominated";
    case FathomReason::kInfeasible: return "Infeasible";
    case FathomReason::kIntegralPiece: return "IntegralPiece";
  }
  return "?";
}

const char* cert_status_name(CertStatus s) {
  switch (s) {
    case CertStatus::kCertified: return "Certified";
    case CertStatus::kNotCertified: return "NotCertified";
    case CertStatus::kBudgetExceeded: return "BudgetExceeded";
    case CertStatus::kInfeasible: return "Infeasible";
  }
  return "?";
}

double relative_gap(double m_ub, double m_lb) {
  if (!std::isfinite(m_ub) || !std::isfinite(m_lb)) return kInfinity;
  return (m_ub - m_lb) / std::max(std::abs(m_lb), 1.0);
}

NodeState NodeState::root(int k, RelaxFamily family, SignState sign) {
  NodeState s;
  s.lambda.assign(k, LambdaStatus::kFree);
  s.tau.assign(k, TauStatus::kFree);
  s.sign = sign;
  s.family = family;
  return s;
}

std::string NodeState::key() const {
  std::string out;
  out.reserve(2 * lambda.size() + 2);
  out.push_back(family == RelaxFamily::kZSubstitution ? 'z' : 'h');
  out.push_back("unp"[static_cast<int>(sign)]);
  for (LambdaStatus s : lambda) out.push_back("fzic"[static_cast<int>(s)]);
  for (TauStatus s : tau) out.push_back("fzp"[static_cast<int>(s)]);
  return out;
}

bool NodeState::fully_fixed() const {
  return std::none_of(lambda.begin(), lambda.end(),
                      [](LambdaStatus s) { return s == LambdaStatus::kFree; });
}

namespace {

constexpr double kMassTol = 1e-12;

double fixed_mass(const Instance& inst, const NodeState& node) {
  double mass = 0.0;
  for (int i = 0; i < inst.k; ++i) {
    if (node.lambda[i] == LambdaStatus::kCap || node.tau[i] == TauStatus::kPositive) {
      mass += inst.cap(i);
    }
  }
  return mass;
}

std::string label_lambda(int i, LambdaStatus s) {
  const std::string v = "lambda" + std::to_string(i + 1);
  switch (s) {
    case LambdaStatus::kZero: return v + " = 0";
    case LambdaStatus::kInterior: return v + " in (0,cap)";
    case LambdaStatus::kCap: return v + " = cap";
    case LambdaStatus::kFree: break;
  }
  return v + " free";
}

std::string label_tau(int i, TauStatus s) {
  const std::string v = "tau" + std::to_string(i + 1);
  return s == TauStatus::kZero ? v + " = 0" : v + " > 0";
}

}  // namespace

std::optional<std::string> contradiction(const Instance& inst, const NodeState& node) {
  double reach = 0.0;
  for (int i = 0; i < inst.k; ++i) {
    if (node.tau[i] == TauStatus::kPositive &&
        (node.lambda[i] == LambdaStatus::kZero || node.lambda[i] == LambdaStatus::kInterior)) {
      return "tau" + std::to_string(i + 1) + " > 0 needs lambda" + std::to_string(i + 1) +
             " at cap";
    }
    if (node.lambda[i] != LambdaStatus::kZero) reach += inst.cap(i);
  }
  if (fixed_mass(inst, node) > 1.0 + kMassTol) return "weights pinned at cap exceed one";
  if (reach < 1.0 - kMassTol) return "remaining weights cannot reach one";
  return std::nullopt;
}

std::vector<int> close_implications(const Instance& inst, NodeState& node) {
  const double mass = fixed_mass(inst, node);
  std::vector<int> reported;
  for (int i = 0; i < inst.k; ++i) {
    if (node.tau[i] != TauStatus::kFree) continue;
    const LambdaStatus l = node.lambda[i];
    if (l == LambdaStatus::kZero || l == LambdaStatus::kInterior) {
      node.tau[i] = TauStatus::kZero;
    } else if (l == LambdaStatus::kFree && mass + inst.cap(i) > 1.0 + kMassTol) {
      node.tau[i] = TauStatus::kZero;
      reported.push_back(i);
    }
  }
  return reported;
}

Fixings node_fixings(const NodeState& node) {
  Fixings f;
  const int k = static_cast<int>(node.lambda.size());
  for (int i = 0; i < k; ++i) {
    switch (node.lambda[i]) {
      case LambdaStatus::kZero: f.cuts.push_back({i, CutBranch::kI}); break;
      case LambdaStatus::kInterior: f.cuts.push_back({i, CutBranch::kIII}); break;
      case LambdaStatus::kCap: f.cuts.push_back({i, CutBranch::kII}); break;
      case LambdaStatus::kFree:
        if (node.tau[i] == TauStatus::kPositive) f.cuts.push_back({i, CutBranch::kII});
        break;
    }
    if (node.tau[i] == TauStatus::kZero &&
        (node.lambda[i] == LambdaStatus::kFree || node.lambda[i] == LambdaStatus::kCap)) {
      f.tau_zero.push_back(i);
    }
  }
  return f;
}

NodeLpResult node_lp(const Instance& inst, const NodeState& node, const HullBounds* hull) {
  NodeLpResult out;
  if (auto why = contradiction(inst, node)) {
    out.preprocessed = true;
    out.reason = *why;
    out.solution.status = LpStatus::kInfeasible;
    out.solution.value = kInfinity;
    return out;
  }
  const Fixings fixings = node_fixings(node);
  if (node.family == RelaxFamily::kConvexHull) {
    if (hull == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "hull node needs hull bounds");
    }
    RelaxModel r = hull_relax_model(inst, *hull);
    apply_fixings(r, inst, fixings);
    if (node.sign == SignState::kNonNeg) r.model.set_bounds(r.m, 0.0, kInfinity);
    if (node.sign == SignState::kNonPos) r.model.set_bounds(r.m, -kInfinity, 0.0);
    out.solution = solve_relax(r, inst);
    out.lps_solved = 1;
    return out;
  }
  std::vector<MSign> signs;
  if (node.sign != SignState::kNonPos) signs.push_back(MSign::kNonNeg);
  if (node.sign != SignState::kNonNeg) signs.push_back(MSign::kNonPos);
  for (MSign sign : signs) {
    RelaxModel r = z_relax_model(inst, sign);
    apply_fixings(r, inst, fixings);
    RelaxSolution s = solve_relax(r, inst);
    ++out.lps_solved;
    if (out.lps_solved == 1 || s.value < out.solution.value) out.solution = std::move(s);
  }
  return out;
}

namespace {

class Evaluator {
 public:
  Evaluator(const Instance& inst, const HullBounds* hull) : inst_(inst), hull_(hull) {}

  const NodeLpResult& eval(const NodeState& node) {
    const std::string key = node.key();
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    NodeLpResult res = node_lp(inst_, node, hull_);
    lps_ += res.lps_solved;
    if (res.preprocessed) ++eliminated_;
    return memo_.emplace(key, std::move(res)).first->second;
  }

  void seed(const NodeState& node, NodeLpResult res) {
    lps_ += res.lps_solved;
    memo_.emplace(node.key(), std::move(res));
  }

  int lps() const { return lps_; }
  int eliminated() const { return eliminated_; }
  void add_lps(int n) { lps_ += n; }

 private:
  const Instance& inst_;
  const HullBounds* hull_;
  std::map<std::string, NodeLpResult> memo_;
  int lps_ = 0;
  int eliminated_ = 0;
};

class TreeBuilder {
 public:
  int add(int parent, std::string label) {
    TreeNode n;
    n.id = static_cast<int>(nodes_.size());
    n.parent = parent;
    n.label = std::move(label);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }
  TreeNode& at(int id) { return nodes_[id]; }
  void set_result(int id, const NodeLpResult& r) {
    TreeNode& n = nodes_[id];
    n.grey = r.preprocessed;
    n.solved = !r.preprocessed;
    n.status = r.solution.status;
    n.bound = r.solution.value;
  }
  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  std::vector<TreeNode> nodes_;
};

LambdaStatus candidate_class(const Instance& inst, const LpecPoint& c, int i) {
  if (c.lambda[i] >= inst.cap(i) - 1e-9) return LambdaStatus::kCap;
  if (c.lambda[i] <= 1e-9) return LambdaStatus::kZero;
  return LambdaStatus::kInterior;
}

bool eliminated(const NodeLpResult& r, double threshold) {
  return r.preprocessed || r.solution.status == LpStatus::kInfeasible ||
         r.solution.value > threshold;
}

FixingRoundResult run_round(const Instance& inst, double m_ub, const NodeState& start,
                            const LpecPoint& candidate, const SearchOptions& options,
                            Evaluator& ev, TreeBuilder* tree, int& current) {
  FixingRoundResult out;
  out.node = start;
  NodeState& node = out.node;
  const double threshold = m_ub + options.tol * std::max(1.0, std::abs(m_ub));
  const int lps_before = ev.lps();
  const int elim_before = ev.eliminated();

  auto finish = [&] {
    for (int i : close_implications(inst, node)) {
      out.fixings.push_back(label_tau(i, TauStatus::kZero));
      if (tree) {
        const int grey = tree->add(current, label_tau(i, TauStatus::kPositive));
        tree->at(grey).grey = true;
        tree->at(grey).status = LpStatus::kInfeasible;
        tree->at(grey).fathom = FathomReason::kInfeasible;
        ++out.lps_eliminated;
        current = tree->add(current, label_tau(i, TauStatus::kZero));
      }
    }
    out.lps_solved = ev.lps() - lps_before;
    out.lps_eliminated += ev.eliminated() - elim_before;
  };

  const LambdaStatus kAll[3] = {LambdaStatus::kZero, LambdaStatus::kInterior, LambdaStatus::kCap};
  for (LambdaStatus group : {LambdaStatus::kCap, LambdaStatus::kInterior, LambdaStatus::kZero}) {
    bool fixed_any = false;
    for (int i = 0; i < inst.k; ++i) {
      if (node.lambda[i] != LambdaStatus::kFree || candidate_class(inst, candidate, i) != group) {
        continue;
      }
      const NodeLpResult* res[3] = {nullptr, nullptr, nullptr};
      bool all_gone = true;
      for (int b = 0; b < 3; ++b) {
        if (kAll[b] == group) continue;
        NodeState child = node;
        child.lambda[i] = kAll[b];
        close_implications(inst, child);
        res[b] = &ev.eval(child);
        all_gone = all_gone && eliminated(*res[b], threshold);
      }
      int keep = -1;
      if (tree) {
        for (int b = 0; b < 3; ++b) {
          const int id = tree->add(current, label_lambda(i, kAll[b]));
          if (res[b] == nullptr) {
            keep = id;
            continue;
          }
          tree->set_result(id, *res[b]);
          if (res[b]->preprocessed || res[b]->solution.status == LpStatus::kInfeasible) {
            tree->at(id).fathom = FathomReason::kInfeasible;
          } else if (res[b]->solution.value > threshold) {
            tree->at(id).fathom = FathomReason::kBoundDominated;
          }
        }
      }
      if (!all_gone) {
        if (tree) tree->at(keep).label += " (open)";
        continue;
      }
      node.lambda[i] = group;
      out.fixings.push_back(label_lambda(i, group));
      if (tree) current = keep;
      fixed_any = true;
    }
    if (fixed_any) {
      finish();
      return out;
    }
  }

  // tau_i > 0 forces lambda_i = cap, so its sibling is the cap branch.
  bool fixed_any = false;
  for (int i = 0; i < inst.k; ++i) {
    if (node.tau[i] != TauStatus::kFree || node.lambda[i] != LambdaStatus::kFree ||
        candidate.tau[i] > 1e-9) {
      continue;
    }
    NodeState child = node;
    child.tau[i] = TauStatus::kPositive;
    const NodeLpResult& r = ev.eval(child);
    const bool gone = eliminated(r, threshold);
    if (tree) {
      const int id = tree->add(current, label_tau(i, TauStatus::kPositive));
      tree->set_result(id, r);
      if (gone) {
        tree->at(id).fathom = r.solution.status == LpStatus::kInfeasible
                                  ? FathomReason::kInfeasible
                                  : FathomReason::kBoundDominated;
      }
    }
    if (!gone) continue;
    node.tau[i] = TauStatus::kZero;
    out.fixings.push_back(label_tau(i, TauStatus::kZero));
    if (tree) current = tree->add(current, label_tau(i, TauStatus::kZero));
    fixed_any = true;
  }
  if (fixed_any) {
    finish();
  } else {
    out.lps_solved = ev.lps() - lps_before;
    out.lps_eliminated = ev.eliminated() - elim_before;
  }
  return out;
}

struct RootSetup {
  RelaxFamily family = RelaxFamily::kZSubstitution;
  SignState sign = SignState::kUnknown;
  std::optional<HullBounds> hull;
  // (state, tree node id) per root
  std::vector<std::pair<NodeState, int>> roots;
};

RootSetup setup_roots(const Instance& inst, const SearchOptions& options, Evaluator*& ev_out,
                      std::unique_ptr<Evaluator>& ev_holder, TreeBuilder& tree, int& aux) {
  RootSetup rs;
  // Sign probes on the z-relaxation; the hull evaluator is created later.
  auto zev = std::make_unique<Evaluator>(inst, nullptr);
  const NodeState pos = NodeState::root(inst.k, RelaxFamily::kZSubstitution, SignState::kNonNeg);
  const NodeState neg = NodeState::root(inst.k, RelaxFamily::kZSubstitution, SignState::kNonPos);
  const NodeLpResult& rpos = zev->eval(pos);
  const NodeLpResult& rneg = zev->eval(neg);
  const int id_pos = tree.add(-1, "m >= 0");
  tree.set_result(id_pos, rpos);
  const int id_neg = tree.add(-1, "m <= 0");
  tree.set_result(id_neg, rneg);
  const bool pos_ok = rpos.solution.status != LpStatus::kInfeasible;
  const bool neg_ok = rneg.solution.status != LpStatus::kInfeasible;
  if (!pos_ok) tree.at(id_pos).fathom = FathomReason::kInfeasible;
  if (!neg_ok) tree.at(id_neg).fathom = FathomReason::kInfeasible;
  if (pos_ok && !neg_ok) rs.sign = SignState::kNonNeg;
  if (!pos_ok && neg_ok) rs.sign = SignState::kNonPos;
  const double zroot = std::min(rpos.solution.value, rneg.solution.value);

  bool use_hull = options.relax == RelaxChoice::kConvexHull;
  double hroot = -kInfinity;
  NodeLpResult hres;
  NodeState hstate = NodeState::root(inst.k, RelaxFamily::kConvexHull, rs.sign);
  if (options.relax != RelaxChoice::kZSubstitution && (pos_ok || neg_ok)) {
    rs.hull = hull_bounds(inst, options.threads);
    aux += rs.hull->lps_solved;
    hres = node_lp(inst, hstate, &*rs.hull);
    hroot = hres.solution.value;
    if (options.relax == RelaxChoice::kAuto) use_hull = hroot > zroot;
  }

  if (use_hull && rs.hull) {
    rs.family = RelaxFamily::kConvexHull;
    auto hev = std::make_unique<Evaluator>(inst, &*rs.hull);
    hev->add_lps(zev->lps());
    const int id = tree.add(-1, "root");
    tree.set_result(id, hres);
    hev->seed(hstate, std::move(hres));
    rs.roots.emplace_back(hstate, id);
    ev_holder = std::move(hev);
  } else {
    zev->add_lps(hres.lps_solved);
    rs.family = RelaxFamily::kZSubstitution;
    if (pos_ok) rs.roots.emplace_back(pos, id_pos);
    if (neg_ok) rs.roots.emplace_back(neg, id_neg);
    ev_holder = std::move(zev);
  }
  ev_out = ev_holder.get();
  return rs;
}

void finalize_gap(Certificate& cert) { cert.gap = relative_gap(cert.m_ub, cert.m_lb); }

}  // namespace

FixingRoundResult fixing_round(const Instance& inst, double m_ub, const NodeState& node,
                               const LpecPoint& candidate, const SearchOptions& options,
                               const HullBounds* hull) {
  Evaluator ev(inst, hull);
  int current = -1;
  return run_round(inst, m_ub, node, candidate, options, ev, nullptr, current);
}

namespace {

Certificate verify_once(const Instance& inst, const LpecPoint& candidate,
                        const SearchOptions& options) {
  const Residuals res = residuals(inst, candidate);
  if (!is_feasible(res, 1e-7 * std::max(1.0, std::abs(candidate.m)))) {
    throw Error(ErrorCode::kInvalidArgument,
                "candidate is not LPEC feasible (feasibility " + std::to_string(res.feasibility) +
                    ", complementarity " + std::to_string(res.complementarity) + ")");
  }
  Certificate cert;
  cert.m_ub = candidate.m;
  cert.witness = candidate;
  TreeBuilder tree;
  Evaluator* ev = nullptr;
  std::unique_ptr<Evaluator> holder;
  RootSetup rs = setup_roots(inst, options, ev, holder, tree, cert.aux_lps);
  cert.family = rs.family;
  cert.sign = rs.sign;
  const double cert_threshold = cert.m_ub - options.tol * std::max(1.0, std::abs(cert.m_ub));

  bool all_certified = true;
  double lb = kInfinity;
  for (auto& [state0, root_id] : rs.roots) {
    NodeState state = state0;
    int current = root_id;
    NodeLpResult r = ev->eval(state);
    while (true) {
      tree.set_result(current, r);
      if (r.solution.status == LpStatus::kInfeasible) {
        tree.at(current).fathom = FathomReason::kInfeasible;
        break;
      }
      if (r.solution.value >= cert_threshold) {
        tree.at(current).fathom = FathomReason::kBoundDominated;
        lb = std::min(lb, r.solution.value);
        break;
      }
      FixingRoundResult round =
          run_round(inst, cert.m_ub, state, candidate, options, *ev, &tree, current);
      if (round.fixings.empty()) {
        all_certified = false;
        lb = std::min(lb, r.solution.value);
        break;
      }
      cert.fixings.insert(cert.fixings.end(), round.fixings.begin(), round.fixings.end());
      state = round.node;
      r = ev->eval(state);
    }
  }
  cert.lps_solved = ev->lps();
  int grey = 0;
  for (const TreeNode& n : tree.take()) {
    if (n.grey) ++grey;
    cert.tree.push_back(n);
  }
  cert.lps_eliminated = grey;
  cert.nodes = static_cast<int>(cert.tree.size());
  cert.status = all_certified ? CertStatus::kCertified : CertStatus::kNotCertified;
  cert.m_lb = all_certified ? std::min(lb, cert.m_ub) : lb;
  finalize_gap(cert);
  return cert;
}

}  // namespace

Certificate verify_global(const Instance& inst, const LpecPoint& candidate,
                          const SearchOptions& options) {
  Certificate cert = verify_once(inst, candidate, options);
  if (cert.status == CertStatus::kCertified || options.relax != RelaxChoice::kAuto) return cert;
  // The root comparison does not predict which family fixes more; retry
  // with the other one before giving up.
  SearchOptions other = options;
  other.relax = cert.family == RelaxFamily::kZSubstitution ? RelaxChoice::kConvexHull
                                                           : RelaxChoice::kZSubstitution;
  Certificate retry = verify_once(inst, candidate, other);
  retry.lps_solved += cert.lps_solved;
  retry.lps_eliminated += cert.lps_eliminated;
  retry.aux_lps += cert.aux_lps;
  if (retry.status == CertStatus::kCertified || retry.m_lb > cert.m_lb) return retry;
  cert.lps_solved = retry.lps_solved;
  cert.lps_eliminated = retry.lps_eliminated;
  cert.aux_lps = retry.aux_lps;
  return cert;
}

namespace {

struct OpenNode {
  double bound;
  int id;
  bool operator>(const OpenNode& o) const {
    return bound != o.bound ? bound > o.bound : id > o.id;
  }
};

LpecPoint piece_witness(const Instance& inst, const NodeState& node, const PieceSolution& sol) {
  LpecPoint w;
  w.m = sol.m;
  w.x = sol.x;
  w.tau = sol.tau;
  w.lambda.assign(inst.k, 0.0);
  double remaining = 1.0;
  for (int i = 0; i < inst.k; ++i) {
    if (node.lambda[i] == LambdaStatus::kCap) {
      w.lambda[i] = inst.cap(i);
      remaining -= w.lambda[i];
    }
  }
  for (int i = 0; i < inst.k; ++i) {
    if (node.lambda[i] != LambdaStatus::kInterior) continue;
    w.lambda[i] = std::clamp(remaining, 0.0, inst.cap(i));
    remaining -= w.lambda[i];
  }
  return w;
}

}  // namespace

Certificate solve_global(const Instance& raw, const SearchOptions& options) {
  Certificate cert;
  const ValidationReport report = validate(raw);
  if (report.has(ErrorCode::kEmptyPolytope)) {
    cert.status = CertStatus::kInfeasible;
    cert.aux_lps = report.lps_solved;
    return cert;
  }
  const Instance inst = prepare(raw);

  const CvarSolution cv = minimize_cvar(inst);
  ImproveOptions io;
  io.threads = options.threads;
  const UpperBoundTrace ub = improve(inst, cv.x, io);
  cert.aux_lps += 1 + ub.lps_solved;
  cert.m_ub = ub.m_ub;
  cert.witness = ub.witness;
  auto threshold = [&] { return cert.m_ub - options.tol * std::max(1.0, std::abs(cert.m_ub)); };
  auto offer = [&](const LpecPoint& p) {
    if (p.m < cert.m_ub) {
      cert.m_ub = p.m;
      cert.witness = p;
    }
  };

  TreeBuilder tree;
  Evaluator* ev = nullptr;
  std::unique_ptr<Evaluator> holder;
  RootSetup rs = setup_roots(inst, options, ev, holder, tree, cert.aux_lps);
  cert.family = rs.family;
  cert.sign = rs.sign;

  std::vector<NodeState> states;      // indexed by tree id (sparse use)
  std::vector<RelaxSolution> sols;
  std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<>> open;
  long long created = 0;

  auto ensure = [&](int id) {
    if (static_cast<int>(states.size()) <= id) {
      states.resize(id + 1);
      sols.resize(id + 1);
    }
  };

  // Evaluates a freshly created node and either fathoms it or queues it.
  auto process = [&](int id, const NodeState& state) {
    ++created;
    ensure(id);
    states[id] = state;
    const NodeLpResult& r = ev->eval(state);
    tree.set_result(id, r);
    TreeNode& tn = tree.at(id);
    if (r.solution.status == LpStatus::kInfeasible) {
      tn.fathom = FathomReason::kInfeasible;
      return;
    }
    if (r.solution.value >= threshold()) {
      tn.fathom = FathomReason::kBoundDominated;
      return;
    }
    if (state.fully_fixed()) {
      PieceSpec piece;
      piece.free_tau.resize(inst.k);
      piece.eq_s.resize(inst.k);
      for (int i = 0; i < inst.k; ++i) {
        piece.free_tau[i] = state.lambda[i] == LambdaStatus::kCap && state.tau[i] != TauStatus::kZero;
        piece.eq_s[i] = state.lambda[i] != LambdaStatus::kZero;
      }
      const PieceSolution ps = restricted_lp(inst, piece);
      ev->add_lps(1);
      if (!ps.optimal()) {
        tree.at(id).fathom = FathomReason::kInfeasible;
        return;
      }
      offer(piece_witness(inst, state, ps));
      tree.at(id).bound = std::max(tree.at(id).bound, ps.m);
      tree.at(id).fathom = FathomReason::kIntegralPiece;
      return;
    }
    sols[id] = r.solution;
    const double v = var_of(inst, r.solution.x);
    if (v < cert.m_ub) {
      const UpperBoundTrace t = improve(inst, r.solution.x, io);
      cert.aux_lps += t.lps_solved;
      offer(t.witness);
    }
    if (v <= r.solution.value + options.tol * std::max(1.0, std::abs(v))) {
      tree.at(id).fathom = FathomReason::kIntegralPiece;
      return;
    }
    open.push({r.solution.value, id});
  };

  for (auto& [state, id] : rs.roots) process(id, state);

  bool budget_hit = false;
  while (!open.empty()) {
    const OpenNode top = open.top();
    if (top.bound >= threshold()) {
      open.pop();
      tree.at(top.id).fathom = FathomReason::kBoundDominated;
      continue;
    }
    if (relative_gap(cert.m_ub, std::min(top.bound, cert.m_ub)) <= options.tol) break;
    if (created >= options.budget) {
      budget_hit = true;
      break;
    }
    open.pop();
    const NodeState parent = states[top.id];
    const RelaxSolution& s = sols[top.id];
    int branch = -1;
    double worst = -1.0;
    for (int i = 0; i < inst.k; ++i) {
      if (parent.lambda[i] != LambdaStatus::kFree) continue;
      const double cap = inst.cap(i);
      const double lam = std::clamp(s.lambda_hat[i], 0.0, cap);
      const double slack = std::max(0.0, s.m + s.tau[i] - inst.loss(i, s.x));
      const double viol = std::max(0.0, s.tau[i]) * (cap - lam) + lam * slack;
      if (viol > worst) {
        worst = viol;
        branch = i;
      }
    }
    for (LambdaStatus b : {LambdaStatus::kZero, LambdaStatus::kInterior, LambdaStatus::kCap}) {
      NodeState child = parent;
      child.lambda[branch] = b;
      close_implications(inst, child);
      const int id = tree.add(top.id, label_lambda(branch, b));
      process(id, child);
    }
  }

  double lb = cert.m_ub;
  if (!open.empty()) lb = std::min(lb, open.top().bound);
  cert.m_lb = lb;
  cert.lps_solved = ev->lps();
  cert.tree = tree.take();
  cert.nodes = static_cast<int>(cert.tree.size());
  cert.lps_eliminated = static_cast<int>(
      std::count_if(cert.tree.begin(), cert.tree.end(), [](const TreeNode& n) { return n.grey; }));
  finalize_gap(cert);
  if (budget_hit && cert.gap > options.tol) {
    cert.status = CertStatus::kBudgetExceeded;
  } else {
    cert.status = CertStatus::kCertified;
  }
  return cert;
}

}  // namespace varlpec
