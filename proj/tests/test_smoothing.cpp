#include <gtest/gtest.h>

#include "test_support.hpp"
#include "varlpec/branch_cut.hpp"
#include "varlpec/cvar.hpp"
#include "varlpec/smoothing.hpp"

namespace varlpec {
namespace {

constexpr SmoothFn kBoth[] = {SmoothFn::kSqrtHyperbola, SmoothFn::kLogExp};

// h(m) = sum p_i rho'(x.y^i - m), decreasing from 1 to 0.
double h_of(const Instance& inst, const SmoothKind& kind, const std::vector<double>& x,
            double m) {
  double acc = 0.0;
  for (int i = 0; i < inst.k; ++i) acc += inst.probs[i] * rho_prime(kind, inst.loss(i, x) - m);
  return acc;
}

// Bisection only, run to width 1e-12.
double bisection_oracle(const Instance& inst, const SmoothKind& kind,
                        const std::vector<double>& x) {
  const std::vector<double> l = inst.losses_at(x);
  double lo = *std::min_element(l.begin(), l.end()) - 1.0 - kind.epsilon;
  double hi = *std::max_element(l.begin(), l.end()) + 1.0 + kind.epsilon;
  while (h_of(inst, kind, x, lo) < 1.0 - inst.beta) lo -= hi - lo;
  while (h_of(inst, kind, x, hi) > 1.0 - inst.beta) hi += hi - lo;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (h_of(inst, kind, x, mid) > 1.0 - inst.beta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(Smoothing, ValuesAtZero) {
  for (double eps : {1e-1, 1e-3}) {
    EXPECT_NEAR(rho({SmoothFn::kSqrtHyperbola, eps}, 0.0), eps, 1e-15);
    EXPECT_NEAR(rho({SmoothFn::kLogExp, eps}, 0.0), eps * std::log(2.0), 1e-15);
  }
  EXPECT_DOUBLE_EQ((SmoothKind{SmoothFn::kSqrtHyperbola, 1.0}.c()), 1.0);
  EXPECT_DOUBLE_EQ((SmoothKind{SmoothFn::kLogExp, 1.0}.c()), std::log(2.0));
}

TEST(Smoothing, UniformApproximationOnDenseGrid) {
  for (SmoothFn fn : kBoth) {
    for (double eps : {1e-1, 1e-3, 1e-6}) {
      const SmoothKind kind{fn, eps};
      for (int s = -200000; s <= 200000; ++s) {
        const double t = s * 5e-4;
        const double r = rho(kind, t);
        ASSERT_LE(std::abs(std::max(t, 0.0) - r), kind.c() * eps * (1 + 1e-12) + 1e-15)
            << smooth_fn_name(fn) << " t=" << t;
        ASSERT_TRUE(std::isfinite(r));
        ASSERT_GE(r, 0.0);
      }
    }
  }
}

TEST(Smoothing, ShapeProperties) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (SmoothFn fn : kBoth) {
    const SmoothKind kind{fn, 1e-2};
    for (int trial = 0; trial < 1000; ++trial) {
      const double t = u(rng);
      EXPECT_LE(std::abs(rho_prime(kind, t)), 1.0);
      EXPECT_GE(rho_second(kind, t), 0.0);
      if (fn == SmoothFn::kSqrtHyperbola) EXPECT_GE(rho(kind, t), std::max(t, 0.0));
    }
    EXPECT_GT(rho_second(kind, 0.0), 0.0);
    EXPECT_NEAR(rho(kind, -1e6), 0.0, 1e-9);
    EXPECT_NEAR(rho(kind, 1e6) - 1e6, 0.0, 1e-6);
  }
}

TEST(Smoothing, LogExpDoesNotOverflow) {
  const SmoothKind kind{SmoothFn::kLogExp, 1e-6};
  EXPECT_NEAR(rho(kind, 1000.0), 1000.0, 1e-9);
  EXPECT_NEAR(rho(kind, -1000.0), 0.0, 1e-300);
  EXPECT_NEAR(rho_prime(kind, 1000.0), 1.0, 0.0);
  EXPECT_TRUE(std::isfinite(rho_second(kind, 1000.0)));
}

TEST(Smoothing, PaperSmoothedVarAtCvarPoint) {
  const Instance inst = prepare(paper_instance(0.9));
  const std::vector<double> x = minimize_cvar(inst).x;
  for (SmoothFn fn : kBoth) {
    const SmoothKind kind{fn, 1e-3};
    const SmoothedVarInfo info = smoothed_var_info(inst, kind, x);
    EXPECT_NEAR(info.m, bisection_oracle(inst, kind, x), 1e-9);
    EXPECT_NEAR(info.m, 4.8613, 5e-3);
    EXPECT_LE(info.residual, 1e-10);
  }
}

TEST(Smoothing, SingleScenarioClosedForm) {
  const Instance inst = testing::one_scenario({2.0, -1.0, 0.5}, 0.9);
  const std::vector<double> x = {0.5, 0.25, 0.25};
  const double eps = 1e-2;
  const double a = 1.0 - 2.0 * inst.beta;
  const double t = 2.0 * eps * a / std::sqrt(1.0 - a * a);
  const SmoothKind kind{SmoothFn::kSqrtHyperbola, eps};
  EXPECT_NEAR(smoothed_var(inst, kind, x), inst.loss(0, x) - t, 1e-10);
  const std::vector<double> g = smoothed_var_grad(inst, kind, x);
  EXPECT_EQ(g, inst.losses[0]);
}

TEST(Smoothing, ConvergesToVarAsEpsilonShrinks) {
  const Instance inst = prepare(paper_instance(0.9));
  const std::vector<double> x = minimize_cvar(inst).x;
  const double v = var_of(inst, x);
  double last = lp::kInfinity;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double err = std::abs(smoothed_var(inst, {SmoothFn::kSqrtHyperbola, eps}, x) - v);
    EXPECT_LE(err, last);
    last = err;
  }
  EXPECT_LE(last, 1e-4);
}

TEST(Smoothing, GradientMatchesCentralDifferencesOnPaper) {
  const Instance inst = prepare(paper_instance(0.9));
  const std::vector<double> x = minimize_cvar(inst).x;
  const SmoothKind kind{SmoothFn::kSqrtHyperbola, 1e-1};
  const std::vector<double> g = smoothed_var_grad(inst, kind, x);
  for (int j = 0; j < inst.n; ++j) {
    std::vector<double> a = x, b = x;
    a[j] += 1e-5;
    b[j] -= 1e-5;
    const double fd = (smoothed_var(inst, kind, a) - smoothed_var(inst, kind, b)) / 2e-5;
    EXPECT_NEAR(g[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << j;
    double lo = lp::kInfinity, hi = -lp::kInfinity;
    for (const auto& y : inst.losses) {
      lo = std::min(lo, y[j]);
      hi = std::max(hi, y[j]);
    }
    EXPECT_GE(g[j], lo - 1e-12);
    EXPECT_LE(g[j], hi + 1e-12);
  }
}

TEST(Smoothing, DegenerateCurvatureIsReported) {
  // At beta = 0.5 the root falls midway between two losses far apart
  // relative to epsilon, and rho'' underflows at both.
  const Instance inst = prepare(testing::simplex_instance({{0.0}, {1000.0}}, {0.5, 0.5}, 0.5));
  try {
    smoothed_var_grad(inst, {SmoothFn::kLogExp, 1e-12}, std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCurvature);
  }
}

TEST(Smoothing, PaperContinuationFromCvarPoint) {
  const Instance inst = prepare(paper_instance(0.9));
  const std::vector<double> x0 = minimize_cvar(inst).x;
  const SmoothResult r = smooth_minimize(inst, x0);
  EXPECT_LE(r.m, 4.27);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.stationarity, 1e-7);
  EXPECT_TRUE(testing::in_polytope(inst.polytope, r.x, 1e-8));
  EXPECT_EQ(r.stages.size(), 3u);
  SmoothOptions single;
  single.schedule = {1e-3};
  EXPECT_LE(smooth_minimize(inst, x0, single).m, 4.27);
}

TEST(Smoothing, SingleScenarioIsLinear) {
  const Instance inst = testing::one_scenario({2.0, -1.0, 0.5});
  const SmoothResult r = smooth_minimize(inst, std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.stationarity, 1e-7);
  EXPECT_NEAR(r.x[1], 1.0, 1e-9);
  EXPECT_NEAR(r.var_exact, -1.0, 1e-9);
}

TEST(Smoothing, ContinuationOnCertifiedFixtures) {
  int global = 0;
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const Instance inst = prepare(random_instance(seed, 2 + seed % 2, 4));
    const Certificate c = solve_global(inst);
    ASSERT_EQ(c.status, CertStatus::kCertified);
    const SmoothResult r = smooth_minimize(inst, minimize_cvar(inst).x);
    const bool near = std::abs(r.var_exact - c.m_ub) <= 1e-3;
    global += near;
    // Otherwise the run must have stopped at a stationary point of the
    // smoothed problem, a legal local answer.
    EXPECT_TRUE(near || r.converged) << seed;
    EXPECT_GE(r.var_exact, c.m_ub - 1e-7) << seed;
  }
  EXPECT_GT(global, 0);
}

}  // namespace
}  // namespace varlpec
