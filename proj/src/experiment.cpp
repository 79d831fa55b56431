#include "steering/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "steering/io.hpp"
#include "steering/random.hpp"

namespace steering {

ExperimentConfig uniform_config(double mu, double alice_eff, double bob_eff,
                                long long trials_per_pair, std::uint64_t seed) {
  ExperimentConfig config;
  config.mu = mu;
  config.bob = octahedral_set();
  config.alice_axes = config.bob.axes();
  config.alice_eff.assign(3, {alice_eff, alice_eff});
  config.bob_eff.assign(3, {bob_eff, bob_eff});
  config.trials_per_pair = trials_per_pair;
  config.seed = seed;
  return config;
}

void validate(const ExperimentConfig& config) {
  if (!(config.mu >= 0.0 && config.mu <= 1.0))
    throw InvalidArgument("purity mu must lie in [0, 1]");
  std::size_t n = static_cast<std::size_t>(config.bob.n());
  if (config.alice_axes.size() != n)
    throw InvalidArgument("need one Alice axis per Bob setting");
  for (const BlochVector& a : config.alice_axes)
    if (std::abs(norm(a) - 1.0) > 1e-3)
      throw InvalidArgument("Alice axes must be unit length (within 1e-3)");
  if (config.alice_eff.size() != n || config.bob_eff.size() != n)
    throw InvalidArgument("need one efficiency pair per setting on each side");
  for (const auto& e : config.alice_eff)
    for (double v : e)
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidArgument("efficiencies must lie in [0, 1]");
  for (const auto& e : config.bob_eff)
    for (double v : e)
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidArgument("efficiencies must lie in [0, 1]");
  if (config.trials_per_pair < 0)
    throw InvalidArgument("trials per pair must be >= 0");
  if (!(config.dark_prob >= 0.0 && config.dark_prob < 1.0))
    throw InvalidArgument("dark probability must lie in [0, 1)");
}

namespace {

using Law = std::array<std::array<double, kBobOutcomes>, kAliceOutcomes>;

// Full per-trial law over recorded outcomes for one setting pair, with
// detector efficiencies and (optionally) dark counts. Each detector fires
// if it catches the photon or darks; Alice maps double/none to 0, Bob maps
// double to a fair coin and none to null.
Law outcome_law(const ExperimentConfig& config, int k, int j, double dark) {
  BlochVector u = normalized(config.alice_axes[k]);
  const BlochVector& v = config.bob.axis(j);
  double correlation = config.mu * dot(u, v);
  Law law{};
  for (int a0 = 0; a0 < 2; ++a0) {
    int sa = a0 == 0 ? 1 : -1;
    double alpha = config.alice_eff[k][a0];
    for (int b0 = 0; b0 < 2; ++b0) {
      int sb = b0 == 0 ? 1 : -1;
      double beta = config.bob_eff[j][b0];
      double p0 = 0.25 * (1.0 + sa * sb * correlation);
      // Alice: signal detector fires with alpha or darks; the opposite
      // detector can only dark. Outcomes: signal sign, opposite sign
      // (dark-only), 0 (both or neither).
      double a_fire = 1.0 - (1.0 - alpha) * (1.0 - dark);
      double pa_same = a_fire * (1.0 - dark);
      double pa_opp = (1.0 - a_fire) * dark;
      double pa_zero = a_fire * dark + (1.0 - a_fire) * (1.0 - dark);
      // Bob: same structure, but both-fire splits as a fair coin and
      // neither is recorded as null.
      double b_fire = 1.0 - (1.0 - beta) * (1.0 - dark);
      double pb_same = b_fire * (1.0 - dark) + 0.5 * b_fire * dark;
      double pb_opp = (1.0 - b_fire) * dark + 0.5 * b_fire * dark;
      double pb_null = (1.0 - b_fire) * (1.0 - dark);

      int a_same = a0 == 0 ? 0 : 2;
      int a_opp = a0 == 0 ? 2 : 0;
      int b_same = b0;
      int b_opp = 1 - b0;
      law[a_same][b_same] += p0 * pa_same * pb_same;
      law[a_same][b_opp] += p0 * pa_same * pb_opp;
      law[a_same][2] += p0 * pa_same * pb_null;
      law[a_opp][b_same] += p0 * pa_opp * pb_same;
      law[a_opp][b_opp] += p0 * pa_opp * pb_opp;
      law[a_opp][2] += p0 * pa_opp * pb_null;
      law[1][b_same] += p0 * pa_zero * pb_same;
      law[1][b_opp] += p0 * pa_zero * pb_opp;
      law[1][2] += p0 * pa_zero * pb_null;
    }
  }
  return law;
}

}  // namespace

Law joint_outcome_distribution(const ExperimentConfig& config, int k, int j) {
  validate(config);
  if (k < 0 || k >= config.bob.n() || j < 0 || j >= config.bob.n())
    throw InvalidArgument("setting index out of range");
  return outcome_law(config, k, j, 0.0);
}

TrialCounts::TrialCounts(int n, long long trials_per_pair)
    : n_(n), trials_per_pair_(trials_per_pair) {
  if (n < 1) throw InvalidArgument("need at least one setting");
  if (trials_per_pair < 0) throw InvalidArgument("trials per pair must be >= 0");
  counts_.assign(static_cast<std::size_t>(n) * n * kAliceOutcomes * kBobOutcomes,
                 0);
}

long long& TrialCounts::at(int k, int j, int a_idx, int b_idx) {
  if (k < 0 || k >= n_ || j < 0 || j >= n_)
    throw InvalidArgument("setting index out of range");
  if (a_idx < 0 || a_idx >= kAliceOutcomes || b_idx < 0 || b_idx >= kBobOutcomes)
    throw InvalidArgument("outcome index out of range");
  return counts_[((static_cast<std::size_t>(k) * n_ + j) * kAliceOutcomes +
                  a_idx) *
                     kBobOutcomes +
                 b_idx];
}

long long TrialCounts::at(int k, int j, int a_idx, int b_idx) const {
  return const_cast<TrialCounts*>(this)->at(k, j, a_idx, b_idx);
}

long long TrialCounts::pair_total(int k, int j) const {
  long long total = 0;
  for (int a = 0; a < kAliceOutcomes; ++a)
    for (int b = 0; b < kBobOutcomes; ++b) total += at(k, j, a, b);
  return total;
}

TrialCounts simulate(const ExperimentConfig& config) {
  validate(config);
  int n = config.bob.n();
  TrialCounts counts(n, config.trials_per_pair);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      // Each setting pair draws from its own derived stream, so totals do
      // not depend on evaluation order.
      std::mt19937_64 rng = make_engine(
          derive_seed(config.seed, static_cast<std::uint64_t>(k) * n + j));
      Law law = outcome_law(config, k, j, config.dark_prob);
      // Multinomial draw as sequential binomials over the 9 categories.
      long long remaining = config.trials_per_pair;
      double mass_left = 1.0;
      for (int a = 0; a < kAliceOutcomes && remaining > 0; ++a) {
        for (int b = 0; b < kBobOutcomes && remaining > 0; ++b) {
          if (a == kAliceOutcomes - 1 && b == kBobOutcomes - 1) {
            counts.at(k, j, a, b) = remaining;
            remaining = 0;
            break;
          }
          double p = mass_left > 0.0
                         ? std::clamp(law[a][b] / mass_left, 0.0, 1.0)
                         : 0.0;
          long long drawn =
              p >= 1.0 ? remaining
                       : std::binomial_distribution<long long>(remaining, p)(rng);
          counts.at(k, j, a, b) = drawn;
          remaining -= drawn;
          mass_left -= law[a][b];
        }
      }
    }
  }
  return counts;
}

namespace {

struct SettingAccumulator {
  double numerator_corr = 0.0;
  double numerator_alice = 0.0;
  double denominator = 0.0;
};

// Per-setting estimators from the matched-pair counts, with Bob's +1 column
// rescaled by 1/ratio to equalize his detector efficiencies. Returns the
// accumulator so that the error propagation can reuse the same weights.
SettingAccumulator accumulate(const TrialCounts& counts, int j, double ratio) {
  SettingAccumulator acc;
  const int alice_sign[kAliceOutcomes] = {1, 0, -1};
  for (int a = 0; a < kAliceOutcomes; ++a) {
    for (int b = 0; b < 2; ++b) {  // b = 2 is null: discarded here
      double weight = b == 0 ? 1.0 / ratio : 1.0;
      double scaled = weight * static_cast<double>(counts.at(j, j, a, b));
      int sb = b == 0 ? 1 : -1;
      acc.denominator += scaled;
      acc.numerator_corr += alice_sign[a] * sb * scaled;
      acc.numerator_alice += std::abs(alice_sign[a]) * scaled;
    }
  }
  return acc;
}

}  // namespace

ResidualReport estimate(const TrialCounts& counts,
                        std::span<const double> bob_ratios, double r,
                        double bound) {
  int n = counts.n();
  if (static_cast<int>(bob_ratios.size()) != n)
    throw InvalidArgument("need one efficiency ratio per setting");
  for (double ratio : bob_ratios)
    if (!(ratio > 0.0)) throw InvalidArgument("efficiency ratios must be > 0");
  if (!(r >= 0.0 && r <= 1.0))
    throw InvalidArgument("penalty r must lie in [0, 1]");

  ResidualReport report;
  report.r = r;
  report.bound = bound;
  double variance = 0.0;
  const int alice_sign[kAliceOutcomes] = {1, 0, -1};
  for (int j = 0; j < n; ++j) {
    SettingAccumulator acc = accumulate(counts, j, bob_ratios[j]);
    if (acc.denominator <= 0.0)
      throw InsufficientData("no Bob-detected trials for a matched setting");
    SettingEstimates est;
    est.e_corr = acc.numerator_corr / acc.denominator;
    est.e_alice = acc.numerator_alice / acc.denominator;
    report.per_setting.push_back(est);
    report.s_value += (est.e_corr - r * est.e_alice) / n;
    report.eta_alice += est.e_alice / n;

    // First-order Poisson propagation: each matched count is treated as an
    // independent Poisson variable.
    double g = est.e_corr - r * est.e_alice;
    for (int a = 0; a < kAliceOutcomes; ++a) {
      for (int b = 0; b < 2; ++b) {
        double weight = b == 0 ? 1.0 / bob_ratios[j] : 1.0;
        int sb = b == 0 ? 1 : -1;
        double u = (alice_sign[a] * sb - r * std::abs(alice_sign[a])) * weight;
        double partial = (u - g * weight) / acc.denominator;
        variance += partial * partial *
                    static_cast<double>(counts.at(j, j, a, b)) / (n * n);
      }
    }
  }
  report.residual = report.s_value - bound;
  report.stderr_ = std::sqrt(variance);
  return report;
}

double estimate_bootstrap_stderr(const TrialCounts& counts,
                                 std::span<const double> bob_ratios, double r,
                                 int resamples, std::uint64_t seed) {
  if (resamples < 2) throw InvalidArgument("need at least 2 resamples");
  int n = counts.n();
  if (static_cast<int>(bob_ratios.size()) != n)
    throw InvalidArgument("need one efficiency ratio per setting");
  std::mt19937_64 rng = make_engine(seed);
  std::vector<double> values;
  values.reserve(resamples);
  auto redraw = [&](long long c) -> double {
    if (c <= 0) return 0.0;
    return static_cast<double>(
        std::poisson_distribution<long long>(static_cast<double>(c))(rng));
  };
  const int alice_sign[kAliceOutcomes] = {1, 0, -1};
  for (int t = 0; t < resamples; ++t) {
    double s_value = 0.0;
    bool valid = true;
    for (int j = 0; j < n && valid; ++j) {
      double num_corr = 0.0, num_alice = 0.0, den = 0.0;
      for (int a = 0; a < kAliceOutcomes; ++a) {
        for (int b = 0; b < 2; ++b) {
          double weight = b == 0 ? 1.0 / bob_ratios[j] : 1.0;
          int sb = b == 0 ? 1 : -1;
          double scaled = weight * redraw(counts.at(j, j, a, b));
          den += scaled;
          num_corr += alice_sign[a] * sb * scaled;
          num_alice += std::abs(alice_sign[a]) * scaled;
        }
      }
      if (den <= 0.0) {
        valid = false;
        break;
      }
      s_value += (num_corr - r * num_alice) / den / n;
    }
    if (valid) values.push_back(s_value);
  }
  if (values.size() < 2)
    throw InsufficientData("too few valid bootstrap resamples");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (values.size() - 1.0));
}

SpacetimeBound ftl_speed(double distance_m, double time_s) {
  if (!(distance_m >= 0.0)) throw InvalidArgument("distance must be >= 0");
  if (!(time_s > 0.0)) throw InvalidArgument("time must be > 0");
  double speed = distance_m / time_s;
  return SpacetimeBound{distance_m, time_s, speed, speed / kSpeedOfLight};
}

namespace {

int alice_index(long long a) {
  if (a == 1) return 0;
  if (a == 0) return 1;
  if (a == -1) return 2;
  throw InvalidArgument("Alice outcome must be 1, 0, or -1");
}

int bob_index(long long b) {
  if (b == 1) return 0;
  if (b == -1) return 1;
  if (b == 0) return 2;
  throw InvalidArgument("Bob outcome must be 1, -1, or 0 (no detection)");
}

}  // namespace

TrialCounts read_counts_csv(std::istream& in) {
  std::vector<std::string> lines = io::read_data_lines(in);
  if (lines.empty()) throw InvalidArgument("empty counts file");
  if (io::split_csv(lines[0]) !=
      std::vector<std::string>{"k", "j", "a", "b", "N"})
    throw InvalidArgument("counts file must start with 'k,j,a,b,N'");

  struct Row {
    int k, j, a, b;
    long long count;
  };
  std::vector<Row> rows;
  long long n = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = io::split_csv(lines[i]);
    if (f.size() != 5)
      throw InvalidArgument("count rows need 5 fields: " + lines[i]);
    long long k = io::parse_int(f[0], "k");
    long long j = io::parse_int(f[1], "j");
    long long count = io::parse_int(f[4], "N");
    if (k < 1 || j < 1) throw InvalidArgument("settings are 1-based");
    if (count < 0) throw InvalidArgument("counts must be >= 0");
    n = std::max({n, k, j});
    rows.push_back(Row{static_cast<int>(k), static_cast<int>(j),
                       alice_index(io::parse_int(f[2], "a")),
                       bob_index(io::parse_int(f[3], "b")), count});
  }
  if (rows.empty()) throw InvalidArgument("counts file has no data rows");

  auto fill = [&](TrialCounts& counts) {
    std::vector<char> seen(
        static_cast<std::size_t>(n) * n * kAliceOutcomes * kBobOutcomes, 0);
    for (const Row& row : rows) {
      std::size_t key =
          ((static_cast<std::size_t>(row.k - 1) * n + (row.j - 1)) *
               kAliceOutcomes +
           row.a) *
              kBobOutcomes +
          row.b;
      if (seen[key])
        throw InvalidArgument("duplicate counts row for one (k,j,a,b) cell");
      seen[key] = 1;
      counts.at(row.k - 1, row.j - 1, row.a, row.b) = row.count;
    }
  };
  TrialCounts probe(static_cast<int>(n), 0);
  fill(probe);
  long long total = probe.pair_total(0, 0);
  for (int k = 0; k < probe.n(); ++k)
    for (int j = 0; j < probe.n(); ++j)
      if (probe.pair_total(k, j) != total)
        throw InvalidArgument("every setting pair must have the same trial total");
  TrialCounts counts(static_cast<int>(n), total);
  fill(counts);
  return counts;
}

void write_counts_csv(std::ostream& out, const TrialCounts& counts) {
  const int alice_value[kAliceOutcomes] = {1, 0, -1};
  const int bob_value[kBobOutcomes] = {1, -1, 0};
  out << "k,j,a,b,N\n";
  for (int k = 0; k < counts.n(); ++k)
    for (int j = 0; j < counts.n(); ++j)
      for (int a = 0; a < kAliceOutcomes; ++a)
        for (int b = 0; b < kBobOutcomes; ++b)
          out << (k + 1) << ',' << (j + 1) << ',' << alice_value[a] << ','
              << bob_value[b] << ',' << counts.at(k, j, a, b) << "\n";
}

}  // namespace steering
