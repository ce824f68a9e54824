#include <gtest/gtest.h>

#include <filesystem>

#include "test_support.hpp"
#include "varlpec/scenario_model.hpp"

namespace varlpec {
namespace {

// The bound LPs give the tight box (17/30, 1, 17/50); the simplex alone
// only promises 1 per coordinate.
TEST(ScenarioModel, PaperInstanceIsValidWithAbsBoundBelowOne) {
  const Instance raw = paper_instance(0.9);
  EXPECT_EQ(raw.n, 3);
  EXPECT_EQ(raw.k, 27);
  const ValidationReport rep = validate(raw);
  EXPECT_TRUE(rep.ok());
  const Instance inst = prepare(raw);
  ASSERT_TRUE(inst.polytope.abs_bound.has_value());
  const std::vector<double>& a = *inst.polytope.abs_bound;
  EXPECT_NEAR(a[0], 17.0 / 30.0, 1e-9);
  EXPECT_NEAR(a[1], 1.0, 1e-9);
  EXPECT_NEAR(a[2], 17.0 / 50.0, 1e-9);
  EXPECT_NEAR(rep.coord_min[1], 13.0 / 30.0, 1e-9);
}

TEST(ScenarioModel, ScenarioIndexing) {
  const Instance inst = paper_instance();
  EXPECT_EQ(inst.losses[0], (std::vector<double>{5, 7, 2}));
  EXPECT_EQ(inst.losses[26], (std::vector<double>{-6, -5, -5}));
  EXPECT_EQ(inst.losses[9], (std::vector<double>{0, 7, 2}));
  for (double p : inst.probs) EXPECT_DOUBLE_EQ(p, 1.0 / 27.0);
}

TEST(ScenarioModel, BadProbabilities) {
  Instance inst = testing::simplex_instance({{1.0}, {2.0}}, {0.5, 0.6}, 0.9);
  EXPECT_TRUE(validate(inst).has(ErrorCode::kBadProbabilities));
  EXPECT_THROW(prepare(inst), Error);
  inst.probs = {0.0, 1.0};
  EXPECT_TRUE(validate(inst).has(ErrorCode::kBadProbabilities));
}

TEST(ScenarioModel, BadBetaAndDimensions) {
  Instance inst = testing::simplex_instance({{1.0}, {2.0}}, {0.5, 0.5}, 1.0);
  EXPECT_TRUE(validate(inst).has(ErrorCode::kBadBeta));
  inst.beta = 0.5;
  inst.losses[1].push_back(3.0);
  EXPECT_TRUE(validate(inst).has(ErrorCode::kBadDimensions));
}

TEST(ScenarioModel, UnboundedPolytope) {
  Instance inst = testing::simplex_instance({{1.0, 2.0}}, {1.0}, 0.5);
  inst.polytope.eq.clear();
  EXPECT_TRUE(validate(inst).has(ErrorCode::kUnboundedPolytope));
}

TEST(ScenarioModel, EmptyPolytope) {
  Instance inst = testing::simplex_instance({{1.0, 2.0}}, {1.0}, 0.5);
  inst.polytope.ineq.push_back({{1.0, 1.0}, 0.5});
  EXPECT_TRUE(validate(inst).has(ErrorCode::kEmptyPolytope));
}

TEST(ScenarioModel, TextRoundTrip) {
  const Instance inst = paper_instance(0.8);
  EXPECT_EQ(parse_instance(to_text(inst)), inst);
  const Instance r = random_instance(99, 3, 5);
  EXPECT_EQ(parse_instance(to_text(r)), r);
}

TEST(ScenarioModel, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "varlpec_roundtrip.json";
  const Instance inst = paper_instance();
  save(inst, path.string());
  EXPECT_EQ(load(path.string()), inst);
  std::filesystem::remove(path);
  EXPECT_THROW(load(path.string()), Error);
}

TEST(ScenarioModel, MissingBetaIsParseError) {
  std::string text = to_text(paper_instance());
  const auto pos = text.find("\"beta\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 6, "\"gamma\"");
  try {
    parse_instance(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

TEST(ScenarioModel, RowCountMismatchIsParseError) {
  Instance inst = testing::simplex_instance({{1.0}, {2.0}}, {0.5, 0.5}, 0.5);
  inst.k = 3;
  inst.probs = {0.25, 0.25, 0.5};
  try {
    parse_instance(to_text(inst));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
  EXPECT_THROW(parse_instance("{not json"), Error);
}

TEST(ScenarioModel, RandomInstancesAreReproducibleAndValid) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance a = random_instance(seed, 3, 4);
    EXPECT_EQ(a, random_instance(seed, 3, 4));
    EXPECT_EQ(digest(a), digest(random_instance(seed, 3, 4)));
    EXPECT_TRUE(validate(a).ok()) << seed;
  }
  EXPECT_NE(digest(random_instance(1, 3, 4)), digest(random_instance(2, 3, 4)));
}

}  // namespace
}  // namespace varlpec
