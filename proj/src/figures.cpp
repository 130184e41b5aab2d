#include "chartfolio/figures.hpp"

#include <cmath>

#include "chartfolio/csv.hpp"

namespace chartfolio {

namespace {

std::string alpha_text(double a) { return format_double(a); }

std::string correct_text(const AlphaSweepPoint& p) {
  return p.correct_defined ? format_double(p.correct_fraction) : std::string();
}

}  // namespace

std::string alpha_correct_csv(const AlphaSweepCurve& curve) {
  std::string out = "alpha,correct\n";
  for (const auto& p : curve) out += alpha_text(p.alpha) + "," + correct_text(p) + "\n";
  return out;
}

std::string alpha_all_csv(const AlphaSweepCurve& curve) {
  std::string out = "alpha,all\n";
  for (const auto& p : curve) out += alpha_text(p.alpha) + "," + format_double(p.classified_fraction) + "\n";
  return out;
}

std::string alpha_c1_csv(const AlphaSweepCurve& curve) {
  std::string out = "alpha,c1\n";
  for (const auto& p : curve) out += alpha_text(p.alpha) + "," + format_double(p.c1_fraction) + "\n";
  return out;
}

std::string alpha_curve_csv(const AlphaSweepCurve& curve) {
  std::string out = "alpha,classified,fraction,c1_fraction,correct\n";
  for (const auto& p : curve) {
    out += alpha_text(p.alpha) + "," + std::to_string(p.classified) + "," +
           format_double(p.classified_fraction) + "," + format_double(p.c1_fraction) + "," +
           correct_text(p) + "\n";
  }
  return out;
}

std::string mc_scatter_csv(const McResult& result) {
  std::string out = "repetition,final_wealth\n";
  for (std::size_t r = 0; r < result.final_wealth.size(); ++r) {
    out += std::to_string(r) + "," + format_double(result.final_wealth[r]) + "\n";
  }
  return out;
}

std::string class_probability_csv(const MnlCoefficients& coef, double lo, double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw InputError("class_probability_csv: bad grid");
  std::string out = "yield,p0,p1,p2\n";
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
    const Vector3 p = mnl_predict_probs(coef, x);
    out += format_double(x) + "," + format_double(p[0]) + "," + format_double(p[1]) + "," +
           format_double(p[2]) + "\n";
  }
  return out;
}

std::string proportions_csv(const std::map<std::int64_t, BinProportions>& bins,
                            const std::string& prefix) {
  std::string out = "yield," + prefix + "0," + prefix + "1," + prefix + "2,count\n";
  for (const auto& [k, b] : bins) {
    out += format_fixed(b.yield, 6) + "," + format_double(b.proportions[0]) + "," +
           format_double(b.proportions[1]) + "," + format_double(b.proportions[2]) + "," +
           std::to_string(b.count) + "\n";
  }
  return out;
}

std::string histogram_csv(const DistStats& stats) {
  std::string out = "yield,count\n";
  for (const auto& [k, n] : stats.histogram) {
    out += format_fixed(static_cast<double>(k) * stats.increment, 6) + "," + std::to_string(n) + "\n";
  }
  return out;
}

}  // namespace chartfolio
