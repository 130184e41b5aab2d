#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartfolio/classifier.hpp"
#include "chartfolio/types.hpp"

namespace chartfolio {

// ---------------------------------------------------------------------------
// Confusion matrix and per-class metrics

using ConfusionCounts = Eigen::Matrix<std::int64_t, 3, 3>;

/// counts(i, j) = #(true i, predicted j). Every record needs a prediction.
ConfusionCounts confusion(std::span<const PredictionRecord> records);

struct ClassMetrics {
  Eigen::Array3d precision = Eigen::Array3d::Zero();
  Eigen::Array3d recall = Eigen::Array3d::Zero();
  Eigen::Array3d f1 = Eigen::Array3d::Zero();
  Eigen::Array<std::int64_t, 3, 1> support = Eigen::Array<std::int64_t, 3, 1>::Zero();
  double accuracy = 0;
  /// Set for a class whose row or column is empty; its metrics read 0.
  std::array<bool, 3> degenerate{};
};

ClassMetrics metrics(const ConfusionCounts& cm);

/// Composition of the predicted-`column` pool by true class.
Vector3 predicted_pool_weights(const ConfusionCounts& cm, ClassLabel column = ClassLabel::C1);
/// Per true class, the share predicted as `column` (row-wise rates).
Vector3 buy_rates(const ConfusionCounts& cm, ClassLabel column = ClassLabel::C1);

/// sum_k weights_k * mean_yields_k; weights must lie on the simplex within 1e-9.
double expected_yield(const Vector3& weights, const Vector3& mean_yields);

std::string format_confusion_table(const ConfusionCounts& cm);
std::string format_metrics_table(const ClassMetrics& m);

// ---------------------------------------------------------------------------
// Winsorizing and binning

struct BinningConfig {
  double m = 0.001;
  double winsor_lo = 0.95;
  double winsor_hi = 1.05;

  void validate() const;
};

double winsorize(double x, const BinningConfig& cfg = {});
/// Integer k with m * k the nearest multiple of m; exact halves round away
/// from zero. Quotients within 1e-9 of a half are treated as halves so that
/// decimal inputs like 1.0005 behave as written.
std::int64_t bin_index(double x, double m);
double bin_yield(double x, const BinningConfig& cfg = {});

struct BinProportions {
  double yield = 0;
  std::size_t count = 0;
  Vector3 counts = Vector3::Zero();
  Vector3 proportions = Vector3::Zero();
};

/// Winsorized and binned yield -> share of predictions in each class. With
/// `true_class` only records of that true class contribute. Records must carry
/// a yield and a prediction.
std::map<std::int64_t, BinProportions> proportions_per_yield(
    std::span<const PredictionRecord> records, const BinningConfig& cfg = {},
    std::optional<ClassLabel> true_class = std::nullopt);

// ---------------------------------------------------------------------------
// Ordinary least squares

struct RegressionFit {
  double beta0 = 0, beta1 = 0;
  double stderr0 = 0, stderr1 = 0;
  double p_value0 = 1, p_value1 = 1;
  double r_squared = 0, adj_r_squared = 0;
  std::size_t n = 0;
};

/// y = beta0 + beta1 x + e via the normal equations. Two-sided t p-values
/// with n - 2 degrees of freedom.
template <typename Scalar>
RegressionFit ols_fit(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  const Eigen::Index n = x.size();
  if (y.size() != n) throw InputError("ols_fit: x and y differ in length");
  if (n < 3) throw InputError("ols_fit: need at least 3 points");
  if ((x.array() == x[0]).all()) throw InputError("ols_fit: singular design (constant x)");

  Mat2 xtx;
  xtx << Scalar(n), x.sum(), x.sum(), x.squaredNorm();
  const Vec2 xty(y.sum(), x.dot(y));
  const Eigen::LDLT<Mat2> ldlt(xtx);
  const Vec2 beta = ldlt.solve(xty);

  const Vec resid = (y.array() - beta[0] - beta[1] * x.array()).matrix();
  const Scalar sse = resid.squaredNorm();
  const Scalar mean_y = y.mean();
  const Scalar sst = (y.array() - mean_y).square().sum();
  const double dof = static_cast<double>(n - 2);
  const Mat2 cov = ldlt.solve(Mat2::Identity()) * (sse / Scalar(dof));

  RegressionFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.beta0 = static_cast<double>(beta[0]);
  fit.beta1 = static_cast<double>(beta[1]);
  fit.stderr0 = std::sqrt(std::max(0.0, static_cast<double>(cov(0, 0))));
  fit.stderr1 = std::sqrt(std::max(0.0, static_cast<double>(cov(1, 1))));
  const boost::math::students_t dist(dof);
  auto p_of = [&](double b, double se) {
    if (se == 0.0) return b == 0.0 ? 1.0 : 0.0;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(b / se)));
  };
  fit.p_value0 = p_of(fit.beta0, fit.stderr0);
  fit.p_value1 = p_of(fit.beta1, fit.stderr1);
  fit.r_squared = sst > 0 ? 1.0 - static_cast<double>(sse / sst) : 1.0;
  fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / dof;
  return fit;
}

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Multinomial logit, base class C0

struct MnlCoefficients {
  Eigen::Vector2d intercept = Eigen::Vector2d::Zero();  ///< C1, C2
  Eigen::Vector2d slope = Eigen::Vector2d::Zero();      ///< C1, C2
};

struct MnlFit {
  MnlCoefficients coef;
  Eigen::Vector2d intercept_se = Eigen::Vector2d::Zero(), slope_se = Eigen::Vector2d::Zero();
  Eigen::Vector2d intercept_p = Eigen::Vector2d::Ones(), slope_p = Eigen::Vector2d::Ones();
  double log_likelihood = 0;
  double null_log_likelihood = 0;
  double llr_chi2 = 0;
  double llr_p_value = 1;
  double gradient_norm = 0;
  int iterations = 0;
  std::size_t n = 0;
  /// Log-likelihood after each accepted Newton step, starting at the origin.
  std::vector<double> ll_history;
};

struct MnlOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double ridge = 1e-8;
  /// Parameter norm beyond which the data are treated as separable.
  double separation_bound = 1e4;
};

class MnlConvergenceError : public InputError {
 public:
  using InputError::InputError;
};

/// Maximum likelihood by damped Newton on (intercept, slope) for C1 and C2.
MnlFit mnl_fit(std::span<const double> x, std::span<const ClassLabel> y,
               const MnlOptions& opts = {});

/// Log-likelihood of the data at arbitrary coefficients.
double mnl_log_likelihood(const MnlCoefficients& coef, std::span<const double> x,
                          std::span<const ClassLabel> y);

/// Softmax over utilities (0, a1 + b1 x, a2 + b2 x).
Vector3 mnl_predict_probs(const MnlCoefficients& coef, double x);
inline Vector3 mnl_predict_probs(const MnlFit& fit, double x) {
  return mnl_predict_probs(fit.coef, x);
}

std::string format_mnl_table(const MnlFit& fit, double mean_x);

// ---------------------------------------------------------------------------
// Approval-rate sweep

struct AlphaSweepPoint {
  double alpha = 0;
  std::size_t classified = 0;
  std::size_t total = 0;
  double classified_fraction = 0;
  std::size_t c1_count = 0;
  double c1_fraction = 0;  ///< C1 predictions over all records
  std::size_t correct = 0;
  /// Correct over classified; NaN when nothing was classified.
  double correct_fraction = 0;
  bool correct_defined = false;
};

using AlphaSweepCurve = std::vector<AlphaSweepPoint>;

AlphaSweepCurve alpha_sweep(std::span<const PredictionRecord> records,
                            std::span<const double> alphas);

/// "lo:hi:step", inclusive of hi when it lies on the grid.
std::vector<double> parse_alpha_grid(const std::string& spec);

struct AlphaStarResult {
  std::vector<std::size_t> maximizers;
  std::vector<double> alphas;
  double best_value = 0;
  /// f * (g * gamma1 + (1 - g) * gamma0) per grid point.
  std::vector<double> expected;
  /// f'/f + g'/g by central differences; NaN at the ends or where undefined.
  std::vector<double> first_order_condition;
  bool flat = false;
};

/// Grid maximizers of the expected yield with f = classified fraction and
/// g = correct fraction. All ties are returned.
AlphaStarResult alpha_star_search(const AlphaSweepCurve& curve, double gamma1, double gamma0);

// ---------------------------------------------------------------------------
// Distribution summaries

struct DistStats {
  std::size_t n = 0;
  double mean = 0, median = 0, stdev = 0, min = 0, max = 0, q1 = 0, q3 = 0;
  /// Fisher-Pearson g1 = m3 / m2^(3/2); NaN when the variance is zero.
  double skewness = 0;
  bool skewness_defined = false;
  /// bin index (value = index * increment) -> count
  std::map<std::int64_t, std::size_t> histogram;
  double increment = 0.001;
};

DistStats dist_stats(std::span<const double> values, double increment = 0.001);

/// Pairwise summation in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace chartfolio
