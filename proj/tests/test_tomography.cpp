#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "steering/bloch.hpp"
#include "steering/random.hpp"
#include "steering/tomography.hpp"

using namespace steering;

namespace {

constexpr char kLabels[6] = {'H', 'V', 'D', 'A', 'R', 'L'};

double dist(const BlochVector& a, const BlochVector& b) { return norm(a - b); }

// Deterministic corpus: counts are the rounded Poisson means for a known
// axis, so the maximum-likelihood fit must land on the axis up to rounding.
std::vector<ProbeRecord> exact_corpus(const BlochVector& axis, double scale,
                                      long long trials, int reps = 1) {
  std::vector<ProbeRecord> probes;
  for (int rep = 0; rep < reps; ++rep) {
    for (char label : kLabels) {
      ProbeRecord p;
      p.label = label;
      p.input = nominal_probe_state(label);
      double q = 0.5 * (1.0 + dot(axis, p.input));
      p.counts = {std::llround(scale * static_cast<double>(trials) * q)};
      p.trials = {trials};
      probes.push_back(p);
    }
  }
  return probes;
}

// Noisy corpus: Poisson counts about the model means.
std::vector<ProbeRecord> sampled_corpus(const BlochVector& axis, double scale,
                                        long long trials, int reps,
                                        std::mt19937_64& rng) {
  std::vector<ProbeRecord> probes;
  for (int rep = 0; rep < reps; ++rep) {
    for (char label : kLabels) {
      ProbeRecord p;
      p.label = label;
      p.input = nominal_probe_state(label);
      double lambda = scale * static_cast<double>(trials) *
                      0.5 * (1.0 + dot(axis, p.input));
      p.counts = {std::poisson_distribution<long long>(
          std::max(lambda, 0.0))(rng)};
      p.trials = {trials};
      probes.push_back(p);
    }
  }
  return probes;
}

}  // namespace

TEST_CASE("nominal probe states and prep plates agree") {
  // Propagating the polarizer output H through the nominal plates must
  // reproduce each labeled state exactly.
  for (char label : kLabels) {
    PrepPlates plates = nominal_prep_plates(label);
    BlochVector s = nominal_probe_state('H');
    s = retarder(s, plates.hwp_deg, 180.0, Direction::forward);
    s = retarder(s, plates.qwp_deg, 90.0, Direction::forward);
    CHECK(dist(s, nominal_probe_state(label)) < 1e-12);
  }
  CHECK_THROWS_AS(nominal_probe_state('X'), InvalidArgument);
  CHECK_THROWS_AS(nominal_prep_plates('x'), InvalidArgument);
}

TEST_CASE("noiseless fits recover axis and scale") {
  BlochVector axis = normalized({0.3, -0.5, 0.8});
  std::vector<ProbeRecord> probes = exact_corpus(axis, 0.1, 10000000);
  AxisFit fit = fit_measurement_axis(probes, 1);
  CHECK(angle_between(fit.axis, axis) < 2e-6);
  CHECK(fit.scale == doctest::Approx(0.1).epsilon(1e-5));
}

TEST_CASE("an exactly antipodal probe with zero counts is handled") {
  // True axis +z: the H probe sees q = 0 and zero counts; every other count
  // is an exact integer, so the fit lands on the boundary point exactly.
  std::vector<ProbeRecord> probes = exact_corpus({0, 0, 1}, 0.1, 10000000);
  AxisFit fit = fit_measurement_axis(probes, 1);
  CHECK(angle_between(fit.axis, {0, 0, 1}) < 1e-6);
  CHECK(fit.scale == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("fit is equivariant under count rescaling") {
  BlochVector axis = normalized({-0.2, 0.4, 0.89});
  std::vector<ProbeRecord> probes = exact_corpus(axis, 0.05, 4000000);
  AxisFit base = fit_measurement_axis(probes, 1);
  for (ProbeRecord& p : probes) p.counts[0] *= 4;
  AxisFit scaled = fit_measurement_axis(probes, 1);
  CHECK(angle_between(base.axis, scaled.axis) < 1e-6);
  CHECK(scaled.scale == doctest::Approx(4.0 * base.scale).epsilon(1e-12));
}

TEST_CASE("degenerate probe designs are rejected") {
  BlochVector axis = normalized({0.1, 0.2, 0.97});
  std::vector<ProbeRecord> all = exact_corpus(axis, 0.1, 1000000);

  std::vector<ProbeRecord> coplanar;
  for (const ProbeRecord& p : all)
    if (p.label == 'H' || p.label == 'V' || p.label == 'D' || p.label == 'A')
      coplanar.push_back(p);  // all in the y = 0 plane
  CHECK_THROWS_AS(fit_measurement_axis(coplanar, 1), IllPosedFit);

  std::vector<ProbeRecord> few(all.begin(), all.begin() + 3);
  CHECK_THROWS_AS(fit_measurement_axis(few, 1), IllPosedFit);

  CHECK_THROWS_AS(fit_measurement_axis(all, 2), InvalidArgument);  // setting
  CHECK_THROWS_AS(fit_measurement_axis(all, 0), InvalidArgument);
}

TEST_CASE("zero-tolerance resampling reproduces nominal inputs bit for bit") {
  BlochVector axis = normalized({0.3, 0.1, 0.94});
  std::vector<ProbeRecord> probes = exact_corpus(axis, 0.2, 1000000);
  probes[0].counts[0] = 0;  // zero counts must stay zero
  std::mt19937_64 rng = make_engine(41);
  std::vector<ProbeRecord> out =
      parametric_resample(probes, ResampleOptions{0.0, 0.0}, rng);
  REQUIRE(out.size() == probes.size());
  bool any_count_changed = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    BlochVector nominal = nominal_probe_state(probes[i].label);
    CHECK(out[i].input.x == nominal.x);
    CHECK(out[i].input.y == nominal.y);
    CHECK(out[i].input.z == nominal.z);
    CHECK(out[i].trials == probes[i].trials);
    if (out[i].counts != probes[i].counts) any_count_changed = true;
  }
  CHECK(out[0].counts[0] == 0);
  CHECK(any_count_changed);  // counts are still Poisson-redrawn
}

TEST_CASE("resampled inputs stay within the frozen perturbation bound") {
  BlochVector axis{0, 0, 1};
  std::vector<ProbeRecord> probes = exact_corpus(axis, 0.2, 100000);
  std::mt19937_64 rng = make_engine(7);
  ResampleOptions options;  // 0.005 waves, 0.1 degrees
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<ProbeRecord> out = parametric_resample(probes, options, rng);
    for (const ProbeRecord& p : out) {
      worst = std::max(
          worst, angle_between(p.input, nominal_probe_state(p.label)));
      CHECK(norm(p.input) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(worst < 0.07);   // frozen plate-tolerance bound, radians
  CHECK(worst > 0.005);  // and the perturbation is real
}

TEST_CASE("resampling validates tolerances") {
  std::vector<ProbeRecord> probes = exact_corpus({0, 0, 1}, 0.2, 1000);
  std::mt19937_64 rng = make_engine(1);
  CHECK_THROWS_AS(parametric_resample(probes, ResampleOptions{-0.1, 0.1}, rng),
                  InvalidArgument);
  CHECK_THROWS_AS(parametric_resample(probes, ResampleOptions{0.1, -0.1}, rng),
                  InvalidArgument);
}

TEST_CASE("bootstrap is deterministic and shard independent") {
  std::mt19937_64 rng = make_engine(17);
  std::vector<ProbeRecord> probes =
      sampled_corpus(normalized({0.05, 0.02, 0.998}), 0.31, 12500, 10, rng);

  BootstrapOptions options;
  options.trials = 200;
  options.seed = 5;
  options.threads = 1;
  TomographyEstimate a = bootstrap_tomography(probes, 1, options);
  options.threads = 3;
  TomographyEstimate b = bootstrap_tomography(probes, 1, options);
  CHECK(a.axis.x == b.axis.x);
  CHECK(a.axis.y == b.axis.y);
  CHECK(a.axis.z == b.axis.z);
  CHECK(a.sigma == b.sigma);
  CHECK(a.samples == b.samples);

  options.seed = 6;
  TomographyEstimate c = bootstrap_tomography(probes, 1, options);
  CHECK(a.sigma != c.sigma);
}

TEST_CASE("bootstrap spread is at the expected scale for realistic stats") {
  std::mt19937_64 rng = make_engine(29);
  BlochVector truth = normalized({0.05, 0.02, 0.998});
  std::vector<ProbeRecord> probes = sampled_corpus(truth, 0.31, 12500, 20, rng);

  BootstrapOptions options;
  options.trials = 600;
  options.seed = 2;
  TomographyEstimate estimate = bootstrap_tomography(probes, 1, options);
  CHECK(estimate.samples == 600);
  CHECK(norm(estimate.axis) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(angle_between(estimate.axis, truth) < 0.02);
  CHECK(estimate.sigma > 0.002);
  CHECK(estimate.sigma < 0.03);
}

TEST_CASE("bootstrap mean stabilizes between 5k and 10k trials") {
  std::mt19937_64 rng = make_engine(83);
  BlochVector truth = normalized({-0.03, 0.04, 0.9985});
  std::vector<ProbeRecord> probes = sampled_corpus(truth, 0.31, 12500, 10, rng);

  BootstrapOptions options;
  options.seed = 9;
  options.trials = 5000;
  TomographyEstimate five = bootstrap_tomography(probes, 1, options);
  options.trials = 10000;
  TomographyEstimate ten = bootstrap_tomography(probes, 1, options);
  CHECK(angle_between(five.axis, ten.axis) < 1e-3);
  CHECK(std::abs(five.sigma - ten.sigma) < 0.15 * ten.sigma);
}

TEST_CASE("widespread fit failures surface as an error") {
  // With only six probes, resampling with replacement frequently loses both
  // probes of an axis, leaving a coplanar design: far more than 1% of fits
  // fail, which must be reported rather than silently averaged away.
  std::vector<ProbeRecord> probes =
      exact_corpus(normalized({0.1, 0.2, 0.97}), 0.2, 100000);
  BootstrapOptions options;
  options.trials = 300;
  options.seed = 4;
  CHECK_THROWS_AS(bootstrap_tomography(probes, 1, options), IllPosedFit);
}

TEST_CASE("bootstrap validates its options") {
  std::vector<ProbeRecord> probes =
      exact_corpus(normalized({0.1, 0.2, 0.97}), 0.2, 100000);
  BootstrapOptions one;
  one.trials = 1;
  CHECK_THROWS_AS(bootstrap_tomography(probes, 1, one), InvalidArgument);
}

TEST_CASE("probe CSV round-trips records and rejects malformed input") {
  std::vector<ProbeRecord> probes;
  for (char label : {'H', 'V', 'D', 'A', 'R', 'L'}) {
    ProbeRecord p;
    p.label = label;
    p.input = nominal_probe_state(label);
    p.counts = {100 + label, 200 + label};
    p.trials = {1000, 1000};
    probes.push_back(p);
  }
  std::ostringstream out;
  write_probes_csv(out, probes);

  std::istringstream in(out.str());
  std::vector<ProbeRecord> loaded = load_probes_csv(in);
  REQUIRE(loaded.size() == probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    CHECK(loaded[i].label == probes[i].label);
    CHECK(loaded[i].counts == probes[i].counts);
    CHECK(loaded[i].trials == probes[i].trials);
    CHECK(dist(loaded[i].input, nominal_probe_state(probes[i].label)) == 0.0);
  }

  auto reject = [](const std::string& text) {
    std::istringstream bad(text);
    CHECK_THROWS_AS(load_probes_csv(bad), InvalidArgument);
  };
  reject("");
  reject("wrong,header,here,now\nH,1,5,10\n");
  reject("label,setting,counts,trials\nX,1,5,10\n");       // unknown label
  reject("label,setting,counts,trials\nH,2,5,10\n");       // starts at 2
  reject("label,setting,counts,trials\nH,1,5,10\nH,3,5,10\n");  // gap
  reject("label,setting,counts,trials\nH,1,-5,10\n");      // negative counts
  reject("label,setting,counts,trials\nH,1,5,0\n");        // zero trials
  reject("label,setting,counts,trials\nH,1,5\n");          // short row
}
