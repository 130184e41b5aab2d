#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "chartfolio/analytics.hpp"
#include "chartfolio/montecarlo.hpp"

namespace chartfolio {

/// Plot-ready CSV text; each function mirrors one figure layout.

/// `alpha,correct` (correct share of classified; empty when undefined).
std::string alpha_correct_csv(const AlphaSweepCurve& curve);
/// `alpha,all` (classified share of all records).
std::string alpha_all_csv(const AlphaSweepCurve& curve);
/// `alpha,c1` (C1 predictions over all records).
std::string alpha_c1_csv(const AlphaSweepCurve& curve);
/// `alpha,classified,fraction,c1_fraction,correct`.
std::string alpha_curve_csv(const AlphaSweepCurve& curve);

/// `repetition,final_wealth`, one row per repetition.
std::string mc_scatter_csv(const McResult& result);

/// `yield,p0,p1,p2` on [lo, hi] at the given step.
std::string class_probability_csv(const MnlCoefficients& coef, double lo = 0.745,
                                  double hi = 1.295, double step = 0.001);

/// `yield,<prefix>0,<prefix>1,<prefix>2,count` per bin; prefix "C" gives the
/// overall proportions layout and "t<j>p" the per-true-class layout.
std::string proportions_csv(const std::map<std::int64_t, BinProportions>& bins,
                            const std::string& prefix = "C");

/// `yield,count` histogram at the stats' increment.
std::string histogram_csv(const DistStats& stats);

}  // namespace chartfolio
