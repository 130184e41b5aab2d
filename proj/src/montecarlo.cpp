#include "chartfolio/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "chartfolio/analytics.hpp"
#include "chartfolio/csv.hpp"
#include "chartfolio/normal.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

namespace {

constexpr double kMinMass = 1e-300;

}  // namespace

void TruncNormalSpec::validate() const {
  if (!(sigma > 0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw InputError("truncated normal: need finite mu and sigma > 0");
  }
  if (!(a < b)) throw InputError("truncated normal: need a < b");
  if (!(mass() >= kMinMass)) throw InputError("truncated normal: truncation mass is negligible");
}

double TruncNormalSpec::mass() const {
  const double lo = (a - mu) / sigma, hi = (b - mu) / sigma;
  // Difference in whichever tail keeps precision.
  if (lo > 0) return normal_sf(lo) - normal_sf(hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

double TruncNormalSpec::mean() const {
  const double lo = (a - mu) / sigma, hi = (b - mu) / sigma;
  const double pdf_lo = std::isfinite(lo) ? normal_pdf(lo) : 0.0;
  const double pdf_hi = std::isfinite(hi) ? normal_pdf(hi) : 0.0;
  return mu + sigma * (pdf_lo - pdf_hi) / mass();
}

double TruncNormalSpec::cdf(double x) const {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double lo = (a - mu) / sigma, z = (x - mu) / sigma;
  if (lo > 0) return (normal_sf(lo) - normal_sf(z)) / mass();
  return (normal_cdf(z) - normal_cdf(lo)) / mass();
}

double sample_truncnorm(const TruncNormalSpec& spec, RngStream& rng) {
  const double z = rng.uniform_open();
  double lo = (spec.a - spec.mu) / spec.sigma;
  double hi = (spec.b - spec.mu) / spec.sigma;
  // Reflect an upper-tail window into the lower tail, where Phi has full
  // relative precision.
  const bool reflect = lo > 0;
  if (reflect) {
    std::swap(lo, hi);
    lo = -lo;
    hi = -hi;
  }
  const double c_lo = normal_cdf(lo);
  const double c_hi = normal_cdf(hi);
  const double mass = c_hi - c_lo;
  if (!(mass >= kMinMass)) throw InputError("truncated normal: truncation mass is negligible");
  double std_draw = normal_quantile(c_lo + z * mass);
  std_draw = std::clamp(std_draw, lo, hi);
  if (reflect) std_draw = -std_draw;
  return std::clamp(spec.mu + spec.sigma * std_draw, spec.a, spec.b);
}

void McExperiment::validate() const {
  for (const auto& c : classes) {
    c.spec.validate();
    if (!(c.buy_prob >= 0 && c.buy_prob <= 1)) throw InputError("buy_prob must lie in [0, 1]");
  }
  if (classes[0].count + classes[1].count + classes[2].count == 0) {
    throw InputError("experiment has no draws");
  }
  if (!(initial_wealth >= 0) || !(per_trade_cap >= 0)) {
    throw InputError("initial_wealth and per_trade_cap must be non-negative");
  }
  if (repetitions == 0) throw InputError("repetitions must be positive");
}

McExperiment McExperiment::from_config(const KvConfig& cfg) {
  McExperiment e;
  for (int j = 0; j < 3; ++j) {
    const std::string s = "class" + std::to_string(j + 1) + ".";
    auto& c = e.classes[j];
    c.spec.mu = cfg.get_double(s + "mu");
    c.spec.sigma = cfg.get_double(s + "sigma");
    c.spec.a = cfg.get_double(s + "a", -HUGE_VAL);
    c.spec.b = cfg.get_double(s + "b", HUGE_VAL);
    const long long count = cfg.get_int(s + "count");
    if (count < 0) throw InputError(s + "count must be non-negative");
    c.count = static_cast<std::size_t>(count);
    c.buy_prob = cfg.get_double(s + "buy_prob");
  }
  e.initial_wealth = cfg.get_double("initial_wealth", e.initial_wealth);
  e.per_trade_cap = cfg.get_double("per_trade_cap", e.per_trade_cap);
  const long long reps = cfg.get_int("repetitions", static_cast<long long>(e.repetitions));
  if (reps <= 0) throw InputError("repetitions must be positive");
  e.repetitions = static_cast<std::size_t>(reps);
  const long long seed = cfg.get_int("seed", static_cast<long long>(e.seed));
  e.seed = static_cast<std::uint64_t>(seed);
  e.validate();
  return e;
}

KvConfig McExperiment::to_config() const {
  KvConfig cfg;
  for (int j = 0; j < 3; ++j) {
    const std::string s = "class" + std::to_string(j + 1) + ".";
    const auto& c = classes[j];
    cfg.set(s + "mu", format_double(c.spec.mu));
    cfg.set(s + "sigma", format_double(c.spec.sigma));
    cfg.set(s + "a", format_double(c.spec.a));
    cfg.set(s + "b", format_double(c.spec.b));
    cfg.set(s + "count", std::to_string(c.count));
    cfg.set(s + "buy_prob", format_double(c.buy_prob));
  }
  cfg.set("initial_wealth", format_double(initial_wealth));
  cfg.set("per_trade_cap", format_double(per_trade_cap));
  cfg.set("repetitions", std::to_string(repetitions));
  cfg.set("seed", std::to_string(seed));
  return cfg;
}

McExperiment McExperiment::standard_setup(std::size_t n1, std::size_t n2, std::size_t n3) {
  McExperiment e;
  e.classes[0] = {{0.03, 0.015, 0.02, 0.15}, n1, 0.572};
  e.classes[1] = {{0.0, 0.01, -0.02, 0.02}, n2, 0.315};
  e.classes[2] = {{-0.03, 0.015, -0.15, -0.02}, n3, 0.187};
  return e;
}

namespace {

struct RepOutcome {
  double final_wealth;
  double yield_sum;
};

RepOutcome run_repetition(const McExperiment& exp, std::size_t rep) {
  auto rng = RngStream::derive(exp.seed, "mc", rep);
  struct Draw {
    double yield;
    double buy_prob;
  };
  std::vector<Draw> draws;
  draws.reserve(exp.classes[0].count + exp.classes[1].count + exp.classes[2].count);
  for (const auto& c : exp.classes) {
    for (std::size_t k = 0; k < c.count; ++k) draws.push_back({sample_truncnorm(c.spec, rng), c.buy_prob});
  }
  for (std::size_t i = draws.size(); i > 1; --i) std::swap(draws[i - 1], draws[rng.below(i)]);
  double v = exp.initial_wealth;
  double yield_sum = 0;
  for (const auto& d : draws) {
    yield_sum += d.yield;
    if (rng.uniform() < d.buy_prob) {
      const double stake = std::max(0.0, std::min(v, exp.per_trade_cap));
      v += stake * d.yield;
    }
  }
  return {v, yield_sum};
}

}  // namespace

McResult run_experiment(const McExperiment& exp, unsigned workers) {
  exp.validate();
  const std::size_t reps = exp.repetitions;
  std::vector<double> wealth(reps), yields(reps);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto o = run_repetition(exp, r);
      wealth[r] = o.final_wealth;
      yields[r] = o.yield_sum;
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));
  if (workers == 1) {
    work(0, reps);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (reps + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(reps, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }

  McResult out;
  out.final_wealth = wealth;
  const double n = static_cast<double>(reps);
  out.mean = pairwise_sum(wealth) / n;
  std::vector<double> sq(reps);
  for (std::size_t r = 0; r < reps; ++r) sq[r] = (wealth[r] - out.mean) * (wealth[r] - out.mean);
  out.stdev = reps > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1)) : 0.0;
  std::vector<double> sorted = wealth;
  std::sort(sorted.begin(), sorted.end());
  out.min = sorted.front();
  out.max = sorted.back();
  const std::size_t mid = reps / 2;
  out.median = reps % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  const double draws_per_rep = static_cast<double>(exp.classes[0].count + exp.classes[1].count +
                                                   exp.classes[2].count);
  out.mean_draw_yield = pairwise_sum(yields) / (n * draws_per_rep);
  return out;
}

double linear_expected_gain(const McExperiment& exp) {
  double gain = 0;
  for (const auto& c : exp.classes) {
    gain += static_cast<double>(c.count) * c.buy_prob * c.spec.mean();
  }
  return exp.initial_wealth + exp.per_trade_cap * gain;
}

BreakEvenResult break_even_ratio(const BreakEvenInputs& in) {
  const double denom = in.gamma1 * in.pi1;
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw InputError("break_even_ratio: gamma1 * pi1 must be non-zero");
  }
  BreakEvenResult r;
  r.k2 = in.gamma2 * in.pi2 / denom;
  r.k3 = in.gamma3 * in.pi3 / denom;
  r.min_n1 = -r.k2 * in.n2 - r.k3 * in.n3;
  r.ratio_n1_n3 = in.n3 != 0.0 ? r.min_n1 / in.n3 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace chartfolio
