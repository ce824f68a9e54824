#include "varlpec/report.hpp"

#include <cmath>

#include "json.hpp"

namespace varlpec {

using Json = nlohmann::ordered_json;

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(num(d));
  return a;
}

Json point_json(const LpecPoint& pt) {
  Json j;
  j["m"] = num(pt.m);
  j["x"] = vec(pt.x);
  j["tau"] = vec(pt.tau);
  j["lambda"] = vec(pt.lambda);
  return j;
}

std::string dump(const Json& j, int indent) {
  return j.dump(indent, ' ', false, Json::error_handler_t::strict) + "\n";
}

}  // namespace

std::string point_to_json(const LpecPoint& pt, int indent) { return dump(point_json(pt), indent); }

std::string certificate_to_json(const Certificate& cert, bool include_tree, int indent) {
  Json j;
  j["status"] = cert_status_name(cert.status);
  j["m_ub"] = num(cert.m_ub);
  j["m_lb"] = num(cert.m_lb);
  j["gap"] = num(cert.gap);
  j["family"] = family_name(cert.family);
  j["sign"] = sign_state_name(cert.sign);
  j["lps_solved"] = cert.lps_solved;
  j["lps_eliminated"] = cert.lps_eliminated;
  j["aux_lps"] = cert.aux_lps;
  j["nodes"] = cert.nodes;
  j["fixings"] = cert.fixings;
  j["witness"] = point_json(cert.witness);
  if (include_tree) {
    Json t = Json::array();
    for (const TreeNode& n : cert.tree) {
      Json e;
      e["id"] = n.id;
      e["parent"] = n.parent;
      e["label"] = n.label;
      e["solved"] = n.solved;
      e["grey"] = n.grey;
      e["status"] = lp::status_name(n.status);
      e["bound"] = num(n.bound);
      e["fathom"] = fathom_name(n.fathom);
      t.push_back(std::move(e));
    }
    j["tree"] = std::move(t);
  }
  return dump(j, indent);
}

CandidateFile parse_candidate(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("candidate: ") + e.what());
  }
  auto numbers = [&](const char* field) {
    const Json& a = j.at(field);
    if (!a.is_array()) {
      throw Error(ErrorCode::kParseError, std::string("candidate field '") + field +
                                              "': expected an array of numbers");
    }
    std::vector<double> out;
    for (const Json& v : a) {
      if (!v.is_number()) {
        throw Error(ErrorCode::kParseError, std::string("candidate field '") + field +
                                                "': expected an array of numbers");
      }
      out.push_back(v.get<double>());
    }
    return out;
  };
  if (!j.is_object() || !j.contains("x")) {
    throw Error(ErrorCode::kParseError, "candidate field 'x': missing");
  }
  CandidateFile c;
  c.x = numbers("x");
  if (j.contains("m") && !j["m"].is_null()) {
    if (!j["m"].is_number()) throw Error(ErrorCode::kParseError, "candidate field 'm': not a number");
    c.m = j["m"].get<double>();
  }
  if (j.contains("tau")) c.tau = numbers("tau");
  if (j.contains("lambda")) c.lambda = numbers("lambda");
  return c;
}

LpecPoint candidate_point(const Instance& inst, const CandidateFile& c) {
  if (static_cast<int>(c.x.size()) != inst.n) {
    throw Error(ErrorCode::kBadDimensions, "candidate x has " + std::to_string(c.x.size()) +
                                               " entries, expected n=" + std::to_string(inst.n));
  }
  if (c.m && c.tau && c.lambda) {
    return LpecPoint{*c.m, c.x, *c.tau, *c.lambda};
  }
  if (c.m) {
    auto pt = point_from(inst, *c.m, c.x);
    if (!pt) {
      throw Error(ErrorCode::kInvalidArgument,
                  "candidate m admits no dual weights at the given x");
    }
    return *pt;
  }
  return point_from_portfolio(inst, c.x);
}

}  // namespace varlpec
