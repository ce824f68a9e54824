#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "varlpec/branch_cut.hpp"

namespace varlpec {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return fmt("%.17g", v);
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string node_caption(const TreeNode& n) {
  if (n.grey || n.status == lp::LpStatus::kInfeasible) return "infeasible";
  if (!n.solved) return "";
  return fmt("%.2f", n.bound);
}

std::vector<int> depths(const std::vector<TreeNode>& nodes) {
  std::vector<int> d(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].parent >= 0) d[i] = d[nodes[i].parent] + 1;
  }
  return d;
}

}  // namespace

std::string export_tree(const Certificate& cert, TreeFormat format) {
  std::ostringstream out;
  const std::vector<TreeNode>& nodes = cert.tree;
  if (format == TreeFormat::kDot) {
    out << "digraph bnb {\n";
    out << "  node [shape=box, fontname=\"Helvetica\"];\n";
    out << "  edge [fontname=\"Helvetica\", fontsize=10];\n";
    for (const TreeNode& n : nodes) {
      out << "  n" << n.id << " [label=\"" << node_caption(n) << "\"";
      if (n.grey) {
        out << ", style=filled, fillcolor=gray75";
      } else if (!n.solved) {
        out << ", style=dashed";
      }
      if (n.fathom != FathomReason::kNone) {
        out << ", penwidth=2, xlabel=\"" << fathom_name(n.fathom) << "\"";
      }
      out << "];\n";
    }
    for (const TreeNode& n : nodes) {
      if (n.parent < 0) {
        out << "  root_" << n.id << " [shape=plaintext, label=\"" << dot_escape(n.label)
            << "\"];\n  root_" << n.id << " -> n" << n.id << " [style=invis];\n";
        continue;
      }
      out << "  n" << n.parent << " -> n" << n.id << " [label=\"" << dot_escape(n.label)
          << "\"];\n";
    }
    out << "}\n";
    return out.str();
  }

  // Pre-order so that indentation alone encodes the parent links.
  const std::vector<int> d = depths(nodes);
  std::vector<std::vector<int>> children(nodes.size());
  std::vector<int> stack;
  for (const TreeNode& n : nodes) {
    if (n.parent >= 0) children[n.parent].push_back(n.id);
  }
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (it->parent < 0) stack.push_back(it->id);
  }
  while (!stack.empty()) {
    const TreeNode& n = nodes[stack.back()];
    stack.pop_back();
    out << std::string(2 * d[n.id], ' ') << '#' << n.id << ' ' << n.label
        << " :: bound=" << exact(n.bound) << " status=" << lp::status_name(n.status)
        << " solved=" << (n.solved ? 1 : 0) << " grey=" << (n.grey ? 1 : 0)
        << " fathom=" << fathom_name(n.fathom) << '\n';
    const std::vector<int>& c = children[n.id];
    for (auto it = c.rbegin(); it != c.rend(); ++it) stack.push_back(*it);
  }
  return out.str();
}

namespace {

[[noreturn]] void bad_line(int line, const std::string& why) {
  throw Error(ErrorCode::kParseError, "tree line " + std::to_string(line) + ": " + why);
}

double parse_bound(const std::string& s, int line) {
  if (s == "inf") return lp::kInfinity;
  if (s == "-inf") return -lp::kInfinity;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) bad_line(line, "bad bound '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    bad_line(line, "bad bound '" + s + "'");
  }
}

}  // namespace

std::vector<TreeNode> parse_text_tree(const std::string& text) {
  std::vector<TreeNode> nodes;
  std::vector<int> stack;  // node id per depth
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty()) continue;
    std::size_t indent = raw.find_first_not_of(' ');
    if (indent == std::string::npos) continue;
    if (indent % 2 != 0) bad_line(line, "odd indentation");
    const std::size_t depth = indent / 2;
    if (raw[indent] != '#') bad_line(line, "expected '#'");
    const std::size_t sep = raw.find(" :: ");
    if (sep == std::string::npos) bad_line(line, "missing ' :: '");
    const std::string head = raw.substr(indent + 1, sep - indent - 1);
    const std::size_t space = head.find(' ');
    TreeNode n;
    try {
      n.id = std::stoi(head.substr(0, space));
    } catch (const std::logic_error&) {
      bad_line(line, "bad node id");
    }
    n.label = space == std::string::npos ? "" : head.substr(space + 1);
    if (depth > stack.size()) bad_line(line, "indentation jumps a level");
    stack.resize(depth);
    n.parent = depth == 0 ? -1 : stack.back();
    stack.push_back(n.id);

    std::istringstream fields(raw.substr(sep + 4));
    std::string field;
    while (fields >> field) {
      const std::size_t eq = field.find('=');
      if (eq == std::string::npos) bad_line(line, "bad field '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "bound") {
        n.bound = parse_bound(val, line);
      } else if (key == "status") {
        if (val == "Optimal") n.status = lp::LpStatus::kOptimal;
        else if (val == "Infeasible") n.status = lp::LpStatus::kInfeasible;
        else if (val == "Unbounded") n.status = lp::LpStatus::kUnbounded;
        else bad_line(line, "bad status '" + val + "'");
      } else if (key == "solved") {
        n.solved = val == "1";
      } else if (key == "grey") {
        n.grey = val == "1";
      } else if (key == "fathom") {
        bool found = false;
        for (FathomReason r : {FathomReason::kNone, FathomReason::kBoundDominated,
                               FathomReason::kInfeasible, FathomReason::kIntegralPiece}) {
          if (val == fathom_name(r)) {
            n.fathom = r;
            found = true;
          }
        }
        if (!found) bad_line(line, "bad fathom reason '" + val + "'");
      } else {
        bad_line(line, "unknown field '" + key + "'");
      }
    }
    nodes.push_back(std::move(n));
  }
  return nodes;
}

}  // namespace varlpec
