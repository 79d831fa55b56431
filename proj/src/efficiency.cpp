#include "steering/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include "steering/io.hpp"
#include "steering/random.hpp"

namespace steering {

namespace {

void check_rate(double r, const char* what) {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw InvalidArgument(std::string(what) + " rates must be finite and >= 0");
}

int outcome_index(int outcome, const char* what) {
  if (outcome != 0 && outcome != 1)
    throw InvalidArgument(std::string("bad ") + what +
                          " outcome index (0 = +1, 1 = -1)");
  return outcome;
}

}  // namespace

RateTable::RateTable(int n, double duration_s) : n_(n), duration_s_(duration_s) {
  if (n < 1) throw InvalidArgument("rate table needs at least one setting");
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be > 0");
  c_.assign(static_cast<std::size_t>(n) * n * 4, 0.0);
  a_.assign(static_cast<std::size_t>(n) * 2, 0.0);
  b_.assign(static_cast<std::size_t>(n) * 2, 0.0);
}

double& RateTable::c(int k, int j, int a, int b) {
  if (k < 0 || k >= n_ || j < 0 || j >= n_)
    throw InvalidArgument("setting index out of range");
  return c_[((static_cast<std::size_t>(k) * n_ + j) * 2 +
             outcome_index(a, "Alice")) *
                2 +
            outcome_index(b, "Bob")];
}
double RateTable::c(int k, int j, int a, int b) const {
  return const_cast<RateTable*>(this)->c(k, j, a, b);
}
double& RateTable::alice(int k, int a) {
  if (k < 0 || k >= n_) throw InvalidArgument("setting index out of range");
  return a_[static_cast<std::size_t>(k) * 2 + outcome_index(a, "Alice")];
}
double RateTable::alice(int k, int a) const {
  return const_cast<RateTable*>(this)->alice(k, a);
}
double& RateTable::bob(int j, int b) {
  if (j < 0 || j >= n_) throw InvalidArgument("setting index out of range");
  return b_[static_cast<std::size_t>(j) * 2 + outcome_index(b, "Bob")];
}
double RateTable::bob(int j, int b) const {
  return const_cast<RateTable*>(this)->bob(j, b);
}

RateTable forward_rates(std::span<const std::array<double, 2>> alice_eff,
                        std::span<const std::array<double, 2>> bob_eff,
                        std::span<const std::array<double, 4>> probs,
                        double pair_rate) {
  std::size_t n = alice_eff.size();
  if (n == 0 || bob_eff.size() != n)
    throw InvalidArgument("need one efficiency pair per setting on each side");
  if (probs.size() != n * n)
    throw InvalidArgument("need one probability block per setting pair");
  if (!(pair_rate > 0.0)) throw InvalidArgument("pair rate must be > 0");
  for (const auto& e : alice_eff)
    for (double v : e)
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidArgument("efficiencies must lie in [0, 1]");
  for (const auto& e : bob_eff)
    for (double v : e)
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidArgument("efficiencies must lie in [0, 1]");

  auto block = [&](std::size_t k, std::size_t j) -> const std::array<double, 4>& {
    return probs[k * n + j];
  };
  // p order within a block: {++, +-, -+, --}; Alice marginal p(+|k) is the
  // first two entries, Bob marginal p(+|j) the first and third.
  std::vector<double> alice_plus(n), bob_plus(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& p = block(k, j);
      double sum = 0.0;
      for (double v : p) {
        if (!(v >= 0.0)) throw InvalidArgument("probabilities must be >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidArgument("each probability block must sum to 1");
    }
    double ref = block(k, 0)[0] + block(k, 0)[1];
    for (std::size_t j = 1; j < n; ++j) {
      double marg = block(k, j)[0] + block(k, j)[1];
      if (std::abs(marg - ref) > 1e-9)
        throw InvalidArgument(
            "Alice's marginal must not depend on Bob's setting");
    }
    alice_plus[k] = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      alice_plus[k] += (block(k, j)[0] + block(k, j)[1]) / n;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double ref = block(0, j)[0] + block(0, j)[2];
    for (std::size_t k = 1; k < n; ++k) {
      double marg = block(k, j)[0] + block(k, j)[2];
      if (std::abs(marg - ref) > 1e-9)
        throw InvalidArgument(
            "Bob's marginal must not depend on Alice's setting");
    }
    bob_plus[j] = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      bob_plus[j] += (block(k, j)[0] + block(k, j)[2]) / n;
  }

  RateTable rates(static_cast<int>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& p = block(k, j);
      rates.c(k, j, 0, 0) = pair_rate * alice_eff[k][0] * bob_eff[j][0] * p[0];
      rates.c(k, j, 0, 1) = pair_rate * alice_eff[k][0] * bob_eff[j][1] * p[1];
      rates.c(k, j, 1, 0) = pair_rate * alice_eff[k][1] * bob_eff[j][0] * p[2];
      rates.c(k, j, 1, 1) = pair_rate * alice_eff[k][1] * bob_eff[j][1] * p[3];
    }
  for (std::size_t k = 0; k < n; ++k) {
    rates.alice(k, 0) = pair_rate * alice_eff[k][0] * alice_plus[k];
    rates.alice(k, 1) = pair_rate * alice_eff[k][1] * (1.0 - alice_plus[k]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    rates.bob(j, 0) = pair_rate * bob_eff[j][0] * bob_plus[j];
    rates.bob(j, 1) = pair_rate * bob_eff[j][1] * (1.0 - bob_plus[j]);
  }
  rates.pair_rate = pair_rate;
  return rates;
}

namespace {

// The eight independent rates entering the inversions at one setting pair.
struct PairRates {
  double cpp, cpm, cmp, cmm;  // coincidences C^{(a,b)}
  double ap, am;              // Alice singles
  double bp, bm;              // Bob singles
};

PairRates pair_rates(const RateTable& r, int k, int j) {
  return {r.c(k, j, 0, 0), r.c(k, j, 0, 1), r.c(k, j, 1, 0), r.c(k, j, 1, 1),
          r.alice(k, 0),   r.alice(k, 1),   r.bob(j, 0),     r.bob(j, 1)};
}

double guarded_ratio(double num, double term1, double term2,
                     const char* what) {
  double den = term1 - term2;
  double largest = std::max(std::abs(term1), std::abs(term2));
  if (std::abs(den) <= 1e-9 * largest || den == 0.0)
    throw IllConditioned(std::string(what) +
                             ": denominator vanishes relative to its terms",
                         largest / std::max(std::abs(den), 1e-300));
  return num / den;
}

}  // namespace

std::array<double, 2> bob_efficiencies(const RateTable& rates, int k, int j) {
  PairRates x = pair_rates(rates, k, j);
  double num = x.cpm * x.cmp - x.cpp * x.cmm;
  return {guarded_ratio(num, x.cpm * x.am, x.cmm * x.ap, "bob efficiency +"),
          guarded_ratio(num, x.cmp * x.ap, x.cpp * x.am, "bob efficiency -")};
}

std::array<double, 2> alice_efficiencies(const RateTable& rates, int k, int j) {
  PairRates x = pair_rates(rates, k, j);
  double num = x.cpm * x.cmp - x.cpp * x.cmm;
  return {guarded_ratio(num, x.cmp * x.bm, x.cmm * x.bp, "alice efficiency +"),
          guarded_ratio(num, x.cpm * x.bp, x.cpp * x.bm, "alice efficiency -")};
}

double bob_ratio(const RateTable& rates, int j) {
  PairRates x = pair_rates(rates, j, j);
  return guarded_ratio(x.cmp * x.ap - x.cpp * x.am, x.cpm * x.am, x.cmm * x.ap,
                       "bob efficiency ratio");
}

namespace {

// First-order Poisson error propagation: each rate x is an independent
// count over duration_s, so var(x) = x / duration. The estimators are
// ratios of bilinear forms; partials are evaluated analytically.
struct Bilinear {
  // f = (u1*u2 - v1*v2) / (w1*w2 - z1*z2) over indices into PairRates
  // viewed as an 8-vector.
  int u1, u2, v1, v2, w1, w2, z1, z2;
};

double component(const PairRates& x, int i) {
  switch (i) {
    case 0: return x.cpp;
    case 1: return x.cpm;
    case 2: return x.cmp;
    case 3: return x.cmm;
    case 4: return x.ap;
    case 5: return x.am;
    case 6: return x.bp;
    default: return x.bm;
  }
}

ValueWithError propagate(const PairRates& x, const Bilinear& f,
                         double duration_s, const char* what) {
  double num = component(x, f.u1) * component(x, f.u2) -
               component(x, f.v1) * component(x, f.v2);
  double value = guarded_ratio(num, component(x, f.w1) * component(x, f.w2),
                               component(x, f.z1) * component(x, f.z2), what);
  double den = component(x, f.w1) * component(x, f.w2) -
               component(x, f.z1) * component(x, f.z2);
  double var = 0.0;
  for (int i = 0; i < 8; ++i) {
    double dnum = 0.0, dden = 0.0;
    if (i == f.u1) dnum += component(x, f.u2);
    if (i == f.u2) dnum += component(x, f.u1);
    if (i == f.v1) dnum -= component(x, f.v2);
    if (i == f.v2) dnum -= component(x, f.v1);
    if (i == f.w1) dden += component(x, f.w2);
    if (i == f.w2) dden += component(x, f.w1);
    if (i == f.z1) dden -= component(x, f.z2);
    if (i == f.z2) dden -= component(x, f.z1);
    double df = (dnum - value * dden) / den;
    var += df * df * component(x, i) / duration_s;
  }
  return {value, std::sqrt(var)};
}

// Index key: 0 C++, 1 C+-, 2 C-+, 3 C--, 4 A+, 5 A-, 6 B+, 7 B-.
constexpr Bilinear kBobPlus{1, 2, 0, 3, 1, 5, 3, 4};
constexpr Bilinear kBobMinus{1, 2, 0, 3, 2, 4, 0, 5};
constexpr Bilinear kAlicePlus{1, 2, 0, 3, 2, 7, 3, 6};
constexpr Bilinear kAliceMinus{1, 2, 0, 3, 1, 6, 0, 7};
constexpr Bilinear kRatio{2, 4, 0, 5, 1, 5, 3, 4};

}  // namespace

EfficiencyEstimate estimate_efficiencies(const RateTable& rates, int k, int j) {
  PairRates x = pair_rates(rates, k, j);
  double d = rates.duration_s();
  EfficiencyEstimate out;
  out.alice[0] = propagate(x, kAlicePlus, d, "alice efficiency +");
  out.alice[1] = propagate(x, kAliceMinus, d, "alice efficiency -");
  out.bob[0] = propagate(x, kBobPlus, d, "bob efficiency +");
  out.bob[1] = propagate(x, kBobMinus, d, "bob efficiency -");
  out.ratio = propagate(x, kRatio, d, "bob efficiency ratio");
  return out;
}

double bob_ratio_bootstrap_stderr(const RateTable& rates, int j, int resamples,
                                  std::uint64_t seed) {
  if (resamples < 2) throw InvalidArgument("need at least 2 resamples");
  PairRates x = pair_rates(rates, j, j);
  double d = rates.duration_s();
  std::mt19937_64 rng = make_engine(seed);
  auto redraw = [&](double rate) {
    if (rate <= 0.0) return 0.0;
    return std::poisson_distribution<long long>(rate * d)(rng) / d;
  };
  std::vector<double> values;
  values.reserve(resamples);
  for (int t = 0; t < resamples; ++t) {
    PairRates y{redraw(x.cpp), redraw(x.cpm), redraw(x.cmp), redraw(x.cmm),
                redraw(x.ap),  redraw(x.am),  redraw(x.bp),  redraw(x.bm)};
    try {
      values.push_back(guarded_ratio(y.cmp * y.ap - y.cpp * y.am,
                                     y.cpm * y.am, y.cmm * y.ap, "ratio"));
    } catch (const IllConditioned&) {
      // A resample can land on a vanishing denominator; skip it.
    }
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

double allan_deviation(std::span<const double> series, int window) {
  if (window < 1) throw InvalidArgument("window must be >= 1");
  std::size_t windows = series.size() / window;
  if (windows < 2)
    throw InsufficientData("need at least two full windows");
  std::vector<double> means(windows, 0.0);
  for (std::size_t i = 0; i < windows; ++i) {
    for (int s = 0; s < window; ++s) means[i] += series[i * window + s];
    means[i] /= window;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < windows; ++i)
    acc += (means[i + 1] - means[i]) * (means[i + 1] - means[i]);
  return std::sqrt(acc / (2.0 * (windows - 1.0)));
}

namespace {

using C2 = std::array<std::complex<double>, 4>;   // row-major 2x2
using C4 = std::array<std::complex<double>, 16>;  // row-major 4x4

C4 kron(const C2& a, const C2& b) {
  C4 out{};
  for (int i1 = 0; i1 < 2; ++i1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int i2 = 0; i2 < 2; ++i2)
        for (int j2 = 0; j2 < 2; ++j2)
          out[(i1 * 2 + i2) * 4 + (j1 * 2 + j2)] =
              a[i1 * 2 + j1] * b[i2 * 2 + j2];
  return out;
}

C4 mul(const C4& a, const C4& b) {
  C4 out{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      for (int j = 0; j < 4; ++j) out[i * 4 + j] += a[i * 4 + k] * b[k * 4 + j];
  return out;
}

C4 adjoint(const C4& a) {
  C4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i * 4 + j] = std::conj(a[j * 4 + i]);
  return out;
}

C2 partial_trace_bob(const C4& m) {
  C2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out[i * 2 + j] += m[(i * 2 + k) * 4 + (j * 2 + k)];
  return out;
}

C2 partial_trace_alice(const C4& m) {
  C2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out[i * 2 + j] += m[(k * 2 + i) * 4 + (k * 2 + j)];
  return out;
}

// Projector onto the +/- eigenstate of axis . sigma; basis |0> = V (Bloch
// +z), |1> = H.
C2 projector(const std::array<double, 3>& axis, int sign) {
  using namespace std::complex_literals;
  C2 out;
  out[0] = 0.5 * (1.0 + sign * axis[2]);
  out[1] = 0.5 * sign * (axis[0] - 1i * axis[1]);
  out[2] = 0.5 * sign * (axis[0] + 1i * axis[1]);
  out[3] = 0.5 * (1.0 - sign * axis[2]);
  return out;
}

double expect2(const C2& rho, const C2& op) {
  std::complex<double> tr = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) tr += rho[i * 2 + k] * op[k * 2 + i];
  return tr.real();
}

double expect4(const C4& rho, const C4& op) {
  std::complex<double> tr = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) tr += rho[i * 4 + k] * op[k * 4 + i];
  return tr.real();
}

// Werner state: mu-weighted singlet plus white noise; |0> = V, |1> = H.
C4 werner(double mu) {
  C4 rho{};
  double half = 0.5 * mu;
  rho[1 * 4 + 1] = half;
  rho[2 * 4 + 2] = half;
  rho[1 * 4 + 2] = -half;
  rho[2 * 4 + 1] = -half;
  double white = (1.0 - mu) / 4.0;
  for (int i = 0; i < 4; ++i) rho[i * 4 + i] += white;
  return rho;
}

}  // namespace

BiasReport bias_study(double background_rate, double pair_prob,
                      double trial_rate, double pdl_fraction,
                      const BiasOptions& options) {
  if (!(background_rate >= 0.0))
    throw InvalidArgument("background rate must be >= 0");
  if (!(pair_prob >= 0.0) || pair_prob >= 0.5)
    throw InvalidArgument("pair probability must lie in [0, 0.5)");
  if (!(trial_rate > 0.0)) throw InvalidArgument("trial rate must be > 0");
  if (!(pdl_fraction >= 0.0 && pdl_fraction < 1.0))
    throw InvalidArgument("loss fraction must lie in [0, 1)");
  if (!(options.mu >= 0.0 && options.mu <= 1.0))
    throw InvalidArgument("purity mu must lie in [0, 1]");
  for (double e :
       {options.alice_eff, options.bob_eff_plus, options.bob_eff_minus})
    if (!(e > 0.0 && e <= 1.0))
      throw InvalidArgument("efficiencies must lie in (0, 1]");

  // Polarization-dependent loss: Kraus attenuation of the horizontal
  // component on each arm. Each party's singles see only their own arm's
  // loss; coincidences see both.
  C2 kraus{};
  kraus[0] = 1.0;
  kraus[3] = std::sqrt(1.0 - pdl_fraction);
  C2 identity{};
  identity[0] = 1.0;
  identity[3] = 1.0;
  C4 rho0 = werner(options.mu);
  C4 ka = kron(kraus, identity);
  C4 kb = kron(identity, kraus);
  C4 kab = kron(kraus, kraus);
  C2 rho_alice = partial_trace_bob(mul(mul(ka, rho0), adjoint(ka)));
  C2 rho_bob = partial_trace_alice(mul(mul(kb, rho0), adjoint(kb)));
  C4 rho_pair = mul(mul(kab, rho0), adjoint(kab));

  double g = background_rate / trial_rate;
  double p1 = pair_prob;
  double p2 = pair_prob * pair_prob;
  double p0 = 1.0 - p1 - p2;
  // Survival factor over the pair-number distribution: the probability that
  // none of the emitted pairs produces the click in question.
  auto survive = [&](double x) {
    return p0 + p1 * (1.0 - x) + p2 * (1.0 - x) * (1.0 - x);
  };

  const std::array<std::array<double, 3>, 3> axes = {
      {{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  const std::array<double, 2> aeff = {options.alice_eff, options.alice_eff};
  const std::array<double, 2> beff = {options.bob_eff_plus,
                                      options.bob_eff_minus};

  RateTable rates(3);
  for (int j = 0; j < 3; ++j) {
    std::array<double, 2> u{}, v{};
    std::array<std::array<double, 2>, 2> w{};
    for (int s = 0; s < 2; ++s) {
      int sign = s == 0 ? 1 : -1;
      u[s] = aeff[s] * expect2(rho_alice, projector(axes[j], sign));
      v[s] = beff[s] * expect2(rho_bob, projector(axes[j], sign));
    }
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb)
        w[sa][sb] = aeff[sa] * beff[sb] *
                    expect4(rho_pair, kron(projector(axes[j], sa == 0 ? 1 : -1),
                                           projector(axes[j], sb == 0 ? 1 : -1)));
    for (int s = 0; s < 2; ++s) {
      rates.alice(j, s) = trial_rate * (1.0 - (1.0 - g) * survive(u[s]));
      rates.bob(j, s) = trial_rate * (1.0 - (1.0 - g) * survive(v[s]));
    }
    for (int sa = 0; sa < 2; ++sa)
      for (int sb = 0; sb < 2; ++sb)
        rates.c(j, j, sa, sb) =
            trial_rate * (1.0 - (1.0 - g) * survive(u[sa]) -
                          (1.0 - g) * survive(v[sb]) +
                          (1.0 - g) * (1.0 - g) *
                              survive(u[sa] + v[sb] - w[sa][sb]));
  }

  BiasReport report;
  report.true_ratio = options.bob_eff_plus / options.bob_eff_minus;
  for (int j = 0; j < 3; ++j) {
    report.estimated[j] = bob_ratio(rates, j);
    report.bias[j] = report.estimated[j] - report.true_ratio;
  }
  return report;
}

std::vector<RateTable> load_rates_csv(std::istream& in, double duration_s) {
  std::vector<std::string> lines = io::read_data_lines(in);
  if (lines.empty()) throw InvalidArgument("empty rate file");
  if (io::split_csv(lines[0]) !=
      std::vector<std::string>{"t", "type", "k", "j", "a", "b", "rate"})
    throw InvalidArgument("rate file must start with 't,type,k,j,a,b,rate'");

  struct Row {
    std::string type;
    long long k, j, a, b;
    double rate;
  };
  std::map<long long, std::vector<Row>> windows;
  long long max_setting = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = io::split_csv(lines[i]);
    if (f.size() != 7)
      throw InvalidArgument("rate rows need 7 fields: " + lines[i]);
    long long t = io::parse_int(f[0], "t");
    if (t < 0) throw InvalidArgument("window index t must be >= 0");
    Row row{f[1], io::parse_int(f[2], "k"), io::parse_int(f[3], "j"),
            io::parse_int(f[4], "a"), io::parse_int(f[5], "b"),
            io::parse_double(f[6], "rate")};
    check_rate(row.rate, "table");
    if (row.type != "C" && row.type != "A" && row.type != "B" &&
        row.type != "N")
      throw InvalidArgument("row type must be C, A, B, or N");
    max_setting = std::max({max_setting, row.k, row.j});
    windows[t].push_back(row);
  }
  if (max_setting < 1 && !windows.empty()) max_setting = 1;

  auto outcome = [](long long v, const char* what) {
    if (v == 1) return 0;
    if (v == -1) return 1;
    throw InvalidArgument(std::string(what) + " outcome must be 1 or -1");
  };

  std::vector<RateTable> out;
  long long expected_t = 0;
  for (const auto& [t, rows] : windows) {
    if (t != expected_t++)
      throw InvalidArgument("window indices must run 0, 1, 2, ... with no gaps");
    RateTable table(static_cast<int>(max_setting), duration_s);
    for (const Row& row : rows) {
      if (row.type == "C") {
        if (row.k < 1 || row.k > max_setting || row.j < 1 || row.j > max_setting)
          throw InvalidArgument("C rows need settings k and j in 1..n");
        table.c(row.k - 1, row.j - 1, outcome(row.a, "Alice"),
                outcome(row.b, "Bob")) = row.rate;
      } else if (row.type == "A") {
        if (row.k < 1 || row.k > max_setting)
          throw InvalidArgument("A rows need setting k in 1..n");
        table.alice(row.k - 1, outcome(row.a, "Alice")) = row.rate;
      } else if (row.type == "B") {
        if (row.j < 1 || row.j > max_setting)
          throw InvalidArgument("B rows need setting j in 1..n");
        table.bob(row.j - 1, outcome(row.b, "Bob")) = row.rate;
      } else {
        table.pair_rate = row.rate;
      }
    }
    out.push_back(std::move(table));
  }
  if (out.empty()) throw InvalidArgument("rate file has no data rows");
  return out;
}

void write_rates_csv(std::ostream& out, std::span<const RateTable> windows) {
  std::streamsize old_precision = out.precision(17);
  out << "t,type,k,j,a,b,rate\n";
  const int signs[2] = {1, -1};
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const RateTable& w = windows[t];
    for (int k = 0; k < w.n(); ++k)
      for (int j = 0; j < w.n(); ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out << t << ",C," << (k + 1) << ',' << (j + 1) << ',' << signs[a]
                << ',' << signs[b] << ',' << w.c(k, j, a, b) << "\n";
    for (int k = 0; k < w.n(); ++k)
      for (int a = 0; a < 2; ++a)
        out << t << ",A," << (k + 1) << ",0," << signs[a] << ",0,"
            << w.alice(k, a) << "\n";
    for (int j = 0; j < w.n(); ++j)
      for (int b = 0; b < 2; ++b)
        out << t << ",B,0," << (j + 1) << ",0," << signs[b] << ','
            << w.bob(j, b) << "\n";
    if (w.pair_rate)
      out << t << ",N,0,0,0,0," << *w.pair_rate << "\n";
  }
  out.precision(old_precision);
}

}  // namespace steering
