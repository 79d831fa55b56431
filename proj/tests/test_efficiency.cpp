#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "steering/efficiency.hpp"

using namespace steering;

namespace {

// A no-signalling joint distribution from marginals and a correlation term.
std::array<double, 4> joint(double pa, double pb, double c) {
  return {pa * pb + c, pa * (1 - pb) - c, (1 - pa) * pb - c,
          (1 - pa) * (1 - pb) + c};
}

// One window of exact rates for flat efficiencies across settings.
RateTable exact_table(const std::array<double, 2>& alpha,
                      const std::array<double, 2>& beta, double correlation,
                      double pair_rate, double duration = 1.0) {
  std::vector<std::array<double, 2>> alice(3, alpha);
  std::vector<std::array<double, 2>> bob(3, beta);
  std::vector<std::array<double, 4>> probs;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      probs.push_back(joint(0.5, 0.5, k == j ? correlation : 0.0));
  RateTable table = forward_rates(alice, bob, probs, pair_rate);
  (void)duration;
  return table;
}

}  // namespace

TEST_CASE("forward rates expand the product form") {
  std::vector<std::array<double, 2>> alice = {{0.8, 0.7}};
  std::vector<std::array<double, 2>> bob = {{0.9, 0.6}};
  std::vector<std::array<double, 4>> probs = {{0.3, 0.2, 0.1, 0.4}};
  RateTable t = forward_rates(alice, bob, probs, 1000.0);
  CHECK(t.n() == 1);
  CHECK(t.c(0, 0, 0, 0) == doctest::Approx(1000 * 0.8 * 0.9 * 0.3));
  CHECK(t.c(0, 0, 0, 1) == doctest::Approx(1000 * 0.8 * 0.6 * 0.2));
  CHECK(t.c(0, 0, 1, 0) == doctest::Approx(1000 * 0.7 * 0.9 * 0.1));
  CHECK(t.c(0, 0, 1, 1) == doctest::Approx(1000 * 0.7 * 0.6 * 0.4));
  CHECK(t.alice(0, 0) == doctest::Approx(1000 * 0.8 * 0.5));
  CHECK(t.alice(0, 1) == doctest::Approx(1000 * 0.7 * 0.5));
  CHECK(t.bob(0, 0) == doctest::Approx(1000 * 0.9 * 0.4));
  CHECK(t.bob(0, 1) == doctest::Approx(1000 * 0.6 * 0.6));
  REQUIRE(t.pair_rate.has_value());
  CHECK(*t.pair_rate == 1000.0);
}

TEST_CASE("forward rates reject signalling distributions") {
  std::vector<std::array<double, 2>> alice(2, {0.8, 0.8});
  std::vector<std::array<double, 2>> bob(2, {0.9, 0.9});
  // Alice's marginal at setting 0 depends on Bob's setting: 0.5 vs 0.6.
  std::vector<std::array<double, 4>> probs = {joint(0.5, 0.5, 0.1),
                                              joint(0.6, 0.5, 0.0),
                                              joint(0.5, 0.5, 0.0),
                                              joint(0.5, 0.5, 0.0)};
  CHECK_THROWS_AS(forward_rates(alice, bob, probs, 100.0), InvalidArgument);
  // Probabilities must be a distribution.
  std::vector<std::array<double, 4>> negative = {{0.5, 0.6, -0.05, -0.05},
                                                 joint(0.5, 0.5, 0.0),
                                                 joint(0.5, 0.5, 0.0),
                                                 joint(0.5, 0.5, 0.0)};
  CHECK_THROWS_AS(forward_rates(alice, bob, negative, 100.0), InvalidArgument);
}

TEST_CASE("inversions are exact on random no-signalling tables") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> eff(0.3, 0.95);
  std::uniform_real_distribution<double> marg(0.25, 0.75);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int trial = 0; trial < 1000; ++trial) {
    int n = 2 + (trial % 2);
    std::vector<std::array<double, 2>> alpha, beta;
    for (int k = 0; k < n; ++k) alpha.push_back({eff(rng), eff(rng)});
    for (int j = 0; j < n; ++j) beta.push_back({eff(rng), eff(rng)});
    std::vector<double> pa, pb;
    for (int k = 0; k < n; ++k) pa.push_back(marg(rng));
    for (int j = 0; j < n; ++j) pb.push_back(marg(rng));

    std::vector<std::array<double, 4>> probs;
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        double cmax = std::min({pa[k] * pb[j], (1 - pa[k]) * (1 - pb[j]),
                                pa[k] * (1 - pb[j]), (1 - pa[k]) * pb[j]});
        // Keep the correlation away from zero so the estimator denominators
        // stay healthy (uncorrelated tables are tested separately).
        double c = (0.35 + 0.6 * unit(rng)) * cmax;
        probs.push_back(joint(pa[k], pb[j], c));
      }
    }
    RateTable t = forward_rates(alpha, beta, probs, 5e5);

    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        std::array<double, 2> b = bob_efficiencies(t, k, j);
        CHECK(b[0] == doctest::Approx(beta[j][0]).epsilon(1e-10));
        CHECK(b[1] == doctest::Approx(beta[j][1]).epsilon(1e-10));
        std::array<double, 2> a = alice_efficiencies(t, k, j);
        CHECK(a[0] == doctest::Approx(alpha[k][0]).epsilon(1e-10));
        CHECK(a[1] == doctest::Approx(alpha[k][1]).epsilon(1e-10));
      }
      CHECK(bob_ratio(t, k) ==
            doctest::Approx(beta[k][0] / beta[k][1]).epsilon(1e-10));
    }
  }
}

TEST_CASE("the efficiency ratio hits simple fractions exactly") {
  RateTable t = exact_table({0.8, 0.8}, {0.7, 0.6}, 0.2, 1e5);
  CHECK(bob_ratio(t, 0) == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
  CHECK(bob_ratio(t, 2) == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("an uncorrelated table is reported as ill-conditioned") {
  RateTable t = exact_table({0.8, 0.8}, {0.7, 0.6}, 0.0, 1e5);
  CHECK_THROWS_AS(bob_ratio(t, 0), IllConditioned);
  try {
    bob_efficiencies(t, 0, 0);
    FAIL("expected IllConditioned");
  } catch (const IllConditioned& e) {
    CHECK(e.condition() > 1e6);
    CHECK(e.category() == "ill-conditioned");
  }
}

TEST_CASE("estimates are invariant under an overall rate rescaling") {
  RateTable t = exact_table({0.75, 0.74}, {0.9, 0.77}, 0.245, 5.76e5);
  RateTable scaled = t;
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) scaled.c(k, j, a, b) *= 3.0;
    for (int a = 0; a < 2; ++a) scaled.alice(k, a) *= 3.0;
    for (int b = 0; b < 2; ++b) scaled.bob(k, b) *= 3.0;
  }
  CHECK(bob_ratio(scaled, 1) == doctest::Approx(bob_ratio(t, 1)).epsilon(1e-12));
  std::array<double, 2> b0 = bob_efficiencies(t, 0, 0);
  std::array<double, 2> b1 = bob_efficiencies(scaled, 0, 0);
  // Every estimator is a ratio of same-degree rate products.
  CHECK(b1[0] == doctest::Approx(b0[0]).epsilon(1e-12));
  CHECK(b1[1] == doctest::Approx(b0[1]).epsilon(1e-12));
}

TEST_CASE("the ratio never reads Bob's own singles") {
  RateTable t = exact_table({0.75, 0.74}, {0.9, 0.77}, 0.245, 5.76e5);
  double ratio = bob_ratio(t, 1);
  for (int j = 0; j < 3; ++j)
    for (int b = 0; b < 2; ++b) t.bob(j, b) = 1e12;  // corrupt Bob's singles
  CHECK(bob_ratio(t, 1) == ratio);
}

TEST_CASE("first-order ratio error matches a bootstrap within 20 percent") {
  RateTable t = exact_table({0.75, 0.74}, {0.90, 0.77}, 0.245, 5.76e5);
  EfficiencyEstimate est = estimate_efficiencies(t, 1, 1);
  CHECK(est.ratio.value == doctest::Approx(0.90 / 0.77).epsilon(1e-12));
  CHECK(est.bob[0].value == doctest::Approx(0.90).epsilon(1e-12));
  CHECK(est.bob[1].value == doctest::Approx(0.77).epsilon(1e-12));
  CHECK(est.alice[0].value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(est.alice[1].value == doctest::Approx(0.74).epsilon(1e-12));
  CHECK(est.ratio.stderr_ > 0.0);

  double boot = bob_ratio_bootstrap_stderr(t, 1, 400, 31);
  CHECK(est.ratio.stderr_ == doctest::Approx(boot).epsilon(0.2));
}

TEST_CASE("longer acquisition windows shrink the standard error") {
  RateTable one = exact_table({0.75, 0.74}, {0.90, 0.77}, 0.245, 5.76e5);
  RateTable hundred(3, 100.0);
  hundred.pair_rate = one.pair_rate;
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          hundred.c(k, j, a, b) = one.c(k, j, a, b);
    for (int a = 0; a < 2; ++a) hundred.alice(k, a) = one.alice(k, a);
    for (int b = 0; b < 2; ++b) hundred.bob(k, b) = one.bob(k, b);
  }
  EfficiencyEstimate e1 = estimate_efficiencies(one, 1, 1);
  EfficiencyEstimate e100 = estimate_efficiencies(hundred, 1, 1);
  CHECK(e100.ratio.value == doctest::Approx(e1.ratio.value).epsilon(1e-12));
  CHECK(e100.ratio.stderr_ ==
        doctest::Approx(e1.ratio.stderr_ / 10.0).epsilon(1e-9));
}

TEST_CASE("allan deviation closed forms") {
  // Constant series: zero deviation at every window.
  std::vector<double> constant(64, 1.25);
  CHECK(allan_deviation(constant, 1) == doctest::Approx(0.0));
  CHECK(allan_deviation(constant, 4) == doctest::Approx(0.0));

  // Alternating +-a: window-1 deviation is a * sqrt(2).
  std::vector<double> alternating;
  for (int i = 0; i < 64; ++i) alternating.push_back(i % 2 ? 0.3 : -0.3);
  CHECK(allan_deviation(alternating, 1) ==
        doctest::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-12));

  // White noise: deviation falls like 1/sqrt(window).
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(5.0, 0.7);
  std::vector<double> white;
  for (int i = 0; i < 4096; ++i) white.push_back(g(rng));
  for (int w : {1, 2, 4, 8}) {
    double got = allan_deviation(white, w);
    CHECK(got == doctest::Approx(0.7 / std::sqrt(double(w))).epsilon(0.2));
  }

  CHECK_THROWS_AS(allan_deviation(white, 0), InvalidArgument);
  std::vector<double> three = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(allan_deviation(three, 2), InsufficientData);
  CHECK(allan_deviation(three, 1) > 0.0);
}

TEST_CASE("bias study: clean sources have vanishing bias") {
  // No background, no loss imbalance: the only distortion left is
  // multi-pair contamination, which is first order in the pair probability.
  // Far below that, rounding noise in the cancelling products dominates at
  // the ~sqrt(machine epsilon) scale, so the floor sits near 1e-8.
  BiasReport clean = bias_study(0.0, 1e-6, 8e7, 0.0);
  BiasReport cleaner = bias_study(0.0, 1e-8, 8e7, 0.0);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(clean.bias[j]) < 1e-6);
    CHECK(std::abs(cleaner.bias[j]) < 1e-7);
  }
  CHECK(clean.true_ratio == doctest::Approx(0.90 / 0.77).epsilon(1e-12));
}

TEST_CASE("bias study: laboratory conditions give a small negative bias") {
  BiasReport report = bias_study(200.0, 0.0072, 8e7, 0.0);
  for (int j = 0; j < 3; ++j) {
    CHECK(report.bias[j] < 0.0);
    CHECK(std::abs(report.bias[j]) > 2e-4);
    CHECK(std::abs(report.bias[j]) < 2e-3);
  }
  // Frozen value from the analytic model.
  CHECK(report.bias[0] == doctest::Approx(-0.000680002420357).epsilon(1e-6));
}

TEST_CASE("bias study: polarization-dependent loss moves the z basis only") {
  BiasReport base = bias_study(200.0, 0.0072, 8e7, 0.0);
  BiasReport pdl = bias_study(200.0, 0.0072, 8e7, 0.02);
  double rel = std::abs(pdl.estimated[0] - base.estimated[0]) / base.estimated[0];
  CHECK(rel > 0.005);
  CHECK(rel < 0.025);
  CHECK(std::abs(pdl.estimated[1] - base.estimated[1]) < 1e-4);
  CHECK(std::abs(pdl.estimated[2] - base.estimated[2]) < 1e-4);
}

TEST_CASE("bias study validates its inputs") {
  CHECK_THROWS_AS(bias_study(-1.0, 0.0072, 8e7, 0.0), InvalidArgument);
  CHECK_THROWS_AS(bias_study(200.0, -0.1, 8e7, 0.0), InvalidArgument);
  CHECK_THROWS_AS(bias_study(200.0, 0.0072, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(bias_study(200.0, 0.0072, 8e7, 1.5), InvalidArgument);
}

TEST_CASE("rate CSV round-trips exactly and rejects malformed input") {
  RateTable a = exact_table({0.75, 0.74}, {0.90, 0.77}, 0.245, 5.76e5, 1.0);
  RateTable b = exact_table({0.75, 0.74}, {0.90, 0.77}, 0.240, 5.76e5, 1.0);
  b.pair_rate.reset();
  std::vector<RateTable> windows = {a, b};

  std::ostringstream out;
  write_rates_csv(out, windows);
  std::istringstream in(out.str());
  std::vector<RateTable> loaded = load_rates_csv(in, 1.0);
  REQUIRE(loaded.size() == 2);
  for (int w = 0; w < 2; ++w) {
    const RateTable& want = windows[w];
    const RateTable& got = loaded[w];
    REQUIRE(got.n() == want.n());
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int x = 0; x < 2; ++x)
          for (int y = 0; y < 2; ++y)
            CHECK(got.c(k, j, x, y) == want.c(k, j, x, y));  // precision 17
    CHECK(got.pair_rate.has_value() == want.pair_rate.has_value());
  }

  auto reject = [](const std::string& text) {
    std::istringstream bad(text);
    CHECK_THROWS_AS(load_rates_csv(bad, 1.0), InvalidArgument);
  };
  reject("");
  reject("a,b,c\n0,C,1,1,1,1,5\n");                      // header
  reject("t,type,k,j,a,b,rate\n0,Q,1,1,1,1,5\n");        // type
  reject("t,type,k,j,a,b,rate\n0,C,1,1,2,1,5\n");        // outcome
  reject("t,type,k,j,a,b,rate\n0,C,0,1,1,1,5\n");        // setting range
  reject("t,type,k,j,a,b,rate\n0,C,1,1,1,1,-5\n");       // negative rate
  reject("t,type,k,j,a,b,rate\n1,C,1,1,1,1,5\n");        // window gap
  reject("t,type,k,j,a,b,rate\n0,C,1,1,1,1,5\n2,C,1,1,1,1,5\n");
}

TEST_CASE("rate table accessors validate indices") {
  RateTable t(2);
  CHECK_THROWS_AS(t.c(2, 0, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(t.c(0, -1, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(t.c(0, 0, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(t.alice(0, 3), InvalidArgument);
  CHECK_THROWS_AS(t.bob(2, 0), InvalidArgument);
  CHECK_THROWS_AS(RateTable(0), InvalidArgument);
  CHECK_THROWS_AS(RateTable(2, -1.0), InvalidArgument);
}
