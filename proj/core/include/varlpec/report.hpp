#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varlpec/branch_cut.hpp"
#include "varlpec/lpec.hpp"

namespace varlpec {

// JSON documents use 17 significant digits and null for infinities.
std::string point_to_json(const LpecPoint& pt, int indent = 2);
std::string certificate_to_json(const Certificate& cert, bool include_tree = true,
                                int indent = 2);

// Candidate file: {"x": [...], "m": optional number}. Extra LPEC fields
// ("tau", "lambda") are accepted and returned for callers that want them.
struct CandidateFile {
  std::vector<double> x;
  std::optional<double> m;
  std::optional<std::vector<double>> tau;
  std::optional<std::vector<double>> lambda;
};

// Throws Error(kParseError).
CandidateFile parse_candidate(const std::string& text);

// LPEC point for a candidate: a full (m, x, tau, lambda) when all fields are
// given, point_from(m, x) when only m is, point_from_portfolio(x) otherwise.
// Throws Error(kInvalidArgument) if m does not admit dual weights.
LpecPoint candidate_point(const Instance& inst, const CandidateFile& c);

}  // namespace varlpec
