#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "chartfolio/kvconfig.hpp"
#include "chartfolio/rng.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

/// N(mu, sigma^2) restricted to [a, b]; a or b may be infinite.
struct TruncNormalSpec {
  double mu = 0;
  double sigma = 1;
  double a = -HUGE_VAL;
  double b = HUGE_VAL;

  void validate() const;
  /// Probability mass of [a, b] under the untruncated normal.
  double mass() const;
  /// Closed-form mean mu + sigma (phi(alpha) - phi(beta)) / Z.
  double mean() const;
  double cdf(double x) const;
};

/// Inverse-CDF draw: one uniform per sample. Works on the lower tail (by
/// reflection) so that far-tail truncations keep their precision. Throws when
/// the truncation mass is below 1e-300.
double sample_truncnorm(const TruncNormalSpec& spec, RngStream& rng);

struct McClass {
  TruncNormalSpec spec;
  std::size_t count = 0;
  double buy_prob = 0;
};

struct McExperiment {
  std::array<McClass, 3> classes;
  double initial_wealth = 1000;
  double per_trade_cap = 1000;
  std::size_t repetitions = 10000;
  std::uint64_t seed = 42;

  void validate() const;

  /// Sections [class1], [class2], [class3] with mu, sigma, a, b, count,
  /// buy_prob; top-level initial_wealth, per_trade_cap, repetitions, seed.
  static McExperiment from_config(const KvConfig& cfg);
  KvConfig to_config() const;

  /// The shared class distributions and buy rates with the given class sizes.
  static McExperiment standard_setup(std::size_t n1, std::size_t n2, std::size_t n3);
};

struct McResult {
  std::vector<double> final_wealth;
  double mean = 0, median = 0, stdev = 0, min = 0, max = 0;
  /// Average net yield over all draws (bought or not).
  double mean_draw_yield = 0;
};

/// Each repetition draws count_j yields per class from its own stream
/// (seed, repetition), shuffles them, then walks the sequence buying with
/// probability buy_prob_j and investing max(0, min(v, cap)). Worker count
/// never changes the result.
McResult run_experiment(const McExperiment& exp, unsigned workers = 1);

/// Closed-form expected final wealth when the cap never binds below v, i.e.
/// v0 + cap * sum_j count_j * buy_prob_j * E[X_j]. Used as a cross-check.
double linear_expected_gain(const McExperiment& exp);

struct BreakEvenInputs {
  double gamma1 = 0, gamma2 = 0, gamma3 = 0;
  double pi1 = 0, pi2 = 0, pi3 = 0;
  double n2 = 0, n3 = 0;
};

struct BreakEvenResult {
  double k2 = 0;  ///< gamma2 pi2 / (gamma1 pi1)
  double k3 = 0;  ///< gamma3 pi3 / (gamma1 pi1)
  double min_n1 = 0;
  /// min_n1 / n3; NaN when n3 = 0.
  double ratio_n1_n3 = 0;
};

/// Smallest n1 with n1 g1 p1 + n2 g2 p2 + n3 g3 p3 >= 0.
BreakEvenResult break_even_ratio(const BreakEvenInputs& in);

}  // namespace chartfolio
