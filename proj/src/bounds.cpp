#include "steering/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <thread>

#include "steering/random.hpp"

namespace steering {

namespace {

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > (std::uint64_t{1} << 62) / base)
      throw InvalidArgument("exhaustive strategy search is too large");
    out *= base;
  }
  return out;
}

int resolve_threads(int threads) {
  return threads > 0 ? threads : default_thread_count();
}

}  // namespace

namespace {

void validate_set(std::vector<BlochVector>& axes, std::vector<double>& sigmas) {
  if (axes.size() < 2)
    throw InvalidArgument("a measurement set needs at least two settings");
  if (sigmas.size() != axes.size())
    throw InvalidArgument("one angular uncertainty per measurement axis");
  for (BlochVector& a : axes) {
    double len = norm(a);
    if (std::abs(len - 1.0) > 1e-3)
      throw InvalidArgument("measurement axes must be unit length (within 1e-3)");
    a = (1.0 / len) * a;
  }
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw InvalidArgument("angular uncertainties must be finite and >= 0");
  }
}

}  // namespace

MeasurementSet::MeasurementSet(std::vector<BlochVector> axes,
                               std::vector<double> sigmas)
    : axes_(std::move(axes)), sigmas_(std::move(sigmas)) {
  validate_set(axes_, sigmas_);
}

MeasurementSet::MeasurementSet(std::vector<BlochVector> axes)
    : axes_(std::move(axes)), sigmas_(axes_.size(), 0.0) {
  validate_set(axes_, sigmas_);
}

MeasurementSet octahedral_set() {
  return MeasurementSet({{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
}

bool mutually_unbiased(const MeasurementSet& meas, double tol) {
  for (int i = 0; i < meas.n(); ++i)
    for (int j = i + 1; j < meas.n(); ++j)
      if (std::abs(dot(meas.axis(i), meas.axis(j))) > tol) return false;
  return true;
}

int CheatStrategy::m() const {
  int count = 0;
  for (int a : alpha)
    if (a != 0) ++count;
  return count;
}

double strategy_value(const CheatStrategy& strategy, const MeasurementSet& meas,
                      double r, ResponseEnsemble* ensemble) {
  int n = meas.n();
  if (static_cast<int>(strategy.alpha.size()) != n ||
      static_cast<int>(strategy.ell.size()) != n)
    throw InvalidArgument("strategy maps must cover every setting");
  if (strategy.d < 1) throw InvalidArgument("message count d must be >= 1");
  for (int a : strategy.alpha)
    if (a < -1 || a > 1)
      throw InvalidArgument("declared outcomes must be -1, 0, or +1");
  for (int l : strategy.ell)
    if (l < 1 || l > strategy.d)
      throw InvalidArgument("messages must lie in 1..d");

  std::vector<BlochVector> groups(strategy.d);
  for (int j = 0; j < n; ++j)
    groups[strategy.ell[j] - 1] =
        groups[strategy.ell[j] - 1] + strategy.alpha[j] * meas.axis(j);

  double total = 0.0;
  for (const BlochVector& g : groups) total += norm(g);
  if (ensemble != nullptr) {
    ensemble->states.assign(strategy.d, std::nullopt);
    for (int l = 0; l < strategy.d; ++l) {
      double len = norm(groups[l]);
      if (len > 1e-12) ensemble->states[l] = (1.0 / len) * groups[l];
    }
  }
  return (-r * strategy.m() + total) / n;
}

namespace {

// Shared enumeration core. Strategies are ranked lexicographically:
// alpha[0] is the most significant digit (values ordered -1 < 0 < +1),
// followed by the remaining alpha entries, then ell[0..n) in base d. The
// evaluator computes, for the strategy at `index`, its zero-penalty value
// c = (1/n) sum_l |group sum| and its m; the penalized value is c - r m / n.
struct StrategyEval {
  double c = 0.0;
  int m = 0;
};

class StrategySpace {
 public:
  StrategySpace(const MeasurementSet& meas, int d)
      : meas_(meas), n_(meas.n()), d_(d) {
    if (d < 1 || d > n_ - 1)
      throw InvalidArgument("message count d must satisfy 1 <= d <= n-1");
    ell_count_ = checked_pow(static_cast<std::uint64_t>(d), n_);
    std::uint64_t alpha_count = checked_pow(3, n_);
    if (alpha_count > (std::uint64_t{1} << 62) / ell_count_)
      throw InvalidArgument("exhaustive strategy search is too large");
    total_ = alpha_count * ell_count_;
  }

  std::uint64_t total() const { return total_; }

  CheatStrategy decode(std::uint64_t index) const {
    CheatStrategy s;
    s.d = d_;
    s.alpha.resize(n_);
    s.ell.resize(n_);
    std::uint64_t alpha_rank = index / ell_count_;
    std::uint64_t ell_rank = index % ell_count_;
    for (int j = n_ - 1; j >= 0; --j) {
      s.alpha[j] = static_cast<int>(alpha_rank % 3) - 1;
      alpha_rank /= 3;
      s.ell[j] = static_cast<int>(ell_rank % d_) + 1;
      ell_rank /= d_;
    }
    return s;
  }

  StrategyEval evaluate(std::uint64_t index,
                        std::vector<BlochVector>& scratch) const {
    scratch.assign(d_, BlochVector{});
    StrategyEval out;
    std::uint64_t alpha_rank = index / ell_count_;
    std::uint64_t ell_rank = index % ell_count_;
    for (int j = n_ - 1; j >= 0; --j) {
      int a = static_cast<int>(alpha_rank % 3) - 1;
      alpha_rank /= 3;
      int l = static_cast<int>(ell_rank % d_);
      ell_rank /= d_;
      if (a != 0) {
        scratch[l] = scratch[l] + a * meas_.axis(j);
        ++out.m;
      }
    }
    double total = 0.0;
    for (const BlochVector& g : scratch) total += norm(g);
    out.c = total / n_;
    return out;
  }

 private:
  const MeasurementSet& meas_;
  int n_;
  int d_;
  std::uint64_t ell_count_ = 1;
  std::uint64_t total_ = 1;
};

struct BestStrategy {
  double value = -std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;

  // Exact-value ties resolve to the lexicographically smaller strategy.
  void offer(double v, std::uint64_t i) {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
};

// Upper envelope of the strategy lines c - r m / n: the best zero-penalty
// value for each possible m.
struct Envelope {
  int n = 0;
  std::vector<double> c;  // indexed by m = 0..n

  double h(double r) const {
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m <= n; ++m)
      best = std::max(best, c[m] - r * m / n);
    return best;
  }
};

template <typename Body>
void parallel_scan(std::uint64_t total, int threads, const Body& body) {
  int workers = std::max(1, threads);
  if (workers == 1 || total < 1024) {
    body(0, std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::uint64_t chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::uint64_t begin = std::min(total, w * chunk);
    std::uint64_t end = std::min(total, begin + chunk);
    pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
  }
  for (std::thread& t : pool) t.join();
}

Envelope compute_envelope(const MeasurementSet& meas, int d, int threads) {
  StrategySpace space(meas, d);
  int workers = resolve_threads(threads);
  std::vector<Envelope> partial(std::max(1, workers));
  for (Envelope& e : partial) {
    e.n = meas.n();
    e.c.assign(meas.n() + 1, -std::numeric_limits<double>::infinity());
  }
  parallel_scan(space.total(), workers,
                [&](int w, std::uint64_t begin, std::uint64_t end) {
                  std::vector<BlochVector> scratch;
                  Envelope& e = partial[w];
                  for (std::uint64_t i = begin; i < end; ++i) {
                    StrategyEval ev = space.evaluate(i, scratch);
                    e.c[ev.m] = std::max(e.c[ev.m], ev.c);
                  }
                });
  Envelope out = partial[0];
  for (std::size_t w = 1; w < partial.size(); ++w)
    for (int m = 0; m <= out.n; ++m) out.c[m] = std::max(out.c[m], partial[w].c[m]);
  return out;
}

GainResult gain_from_envelope(const Envelope& env, double eta) {
  // mu(r) = h(r)/eta + r is piecewise linear, so its minimum over [0,1]
  // sits at an endpoint or at an intersection of two envelope lines.
  std::vector<double> candidates = {0.0, 1.0};
  for (int mi = 0; mi <= env.n; ++mi) {
    if (!std::isfinite(env.c[mi])) continue;
    for (int mj = mi + 1; mj <= env.n; ++mj) {
      if (!std::isfinite(env.c[mj])) continue;
      double r = env.n * (env.c[mj] - env.c[mi]) / (mj - mi);
      if (r >= 0.0 && r <= 1.0) candidates.push_back(r);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  GainResult best;
  best.mu_min = std::numeric_limits<double>::infinity();
  for (double r : candidates) {
    double h = env.h(r);
    double mu = h / eta + r;
    if (mu < best.mu_min - 1e-12) {
      best.r = r;
      best.h = h;
      best.mu_min = mu;
    }
  }
  return best;
}

}  // namespace

BoundResult steering_bound(const MeasurementSet& meas, int d, double r,
                           int threads) {
  if (!(r >= 0.0 && r <= 1.0))
    throw InvalidArgument("penalty r must lie in [0, 1]");
  StrategySpace space(meas, d);
  int workers = resolve_threads(threads);
  std::vector<BestStrategy> partial(std::max(1, workers));
  parallel_scan(space.total(), workers,
                [&](int w, std::uint64_t begin, std::uint64_t end) {
                  std::vector<BlochVector> scratch;
                  BestStrategy& best = partial[w];
                  for (std::uint64_t i = begin; i < end; ++i) {
                    StrategyEval ev = space.evaluate(i, scratch);
                    best.offer(ev.c - r * ev.m / meas.n(), i);
                  }
                });
  BestStrategy best;
  for (const BestStrategy& p : partial) best.offer(p.value, p.index);

  BoundResult out;
  out.r = r;
  out.strategy = space.decode(best.index);
  out.h = strategy_value(out.strategy, meas, r, &out.ensemble);
  return out;
}

GainResult optimal_gain(const MeasurementSet& meas, int d, double eta,
                        int threads) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw InvalidArgument("efficiency eta must lie in (0, 1]");
  return gain_from_envelope(compute_envelope(meas, d, threads), eta);
}

std::vector<CurvePoint> min_purity_curve(const MeasurementSet& meas, int d,
                                         std::span<const double> etas,
                                         int threads) {
  for (double eta : etas)
    if (!(eta > 0.0 && eta <= 1.0))
      throw InvalidArgument("efficiency eta must lie in (0, 1]");
  Envelope env = compute_envelope(meas, d, threads);
  std::vector<CurvePoint> curve;
  curve.reserve(etas.size());
  for (double eta : etas) {
    GainResult g = gain_from_envelope(env, eta);
    curve.push_back({eta, g.r, g.h, g.mu_min});
  }
  return curve;
}

double tsirelson(const MeasurementSet& meas, int d) {
  if (!mutually_unbiased(meas))
    std::cerr << "warning: quantum ceiling assumes mutually unbiased settings; "
                 "this set is not\n";
  Envelope env = compute_envelope(meas, d, 0);
  return 1.0 - env.h(0.0);
}

}  // namespace steering
