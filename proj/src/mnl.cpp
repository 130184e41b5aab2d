#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "chartfolio/analytics.hpp"
#include "chartfolio/csv.hpp"
#include "chartfolio/normal.hpp"

namespace chartfolio {

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;

// Parameter order: a1, b1, a2, b2.
MnlCoefficients unpack(const Vec4& t) {
  MnlCoefficients c;
  c.intercept << t[0], t[2];
  c.slope << t[1], t[3];
  return c;
}

// Log-probabilities for one observation, stable for large utilities.
Eigen::Array3d log_probs(const Vec4& t, double x) {
  const double u1 = t[0] + t[1] * x;
  const double u2 = t[2] + t[3] * x;
  const double mx = std::max({0.0, u1, u2});
  const double lse = mx + std::log(std::exp(-mx) + std::exp(u1 - mx) + std::exp(u2 - mx));
  return {-lse, u1 - lse, u2 - lse};
}

double log_likelihood(const Vec4& t, std::span<const double> x, std::span<const ClassLabel> y) {
  double ll = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ll += log_probs(t, x[i])[index_of(y[i])];
  return ll;
}

void gradient_hessian(const Vec4& t, std::span<const double> x, std::span<const ClassLabel> y,
                      Vec4& grad, Mat4& hess) {
  grad.setZero();
  hess.setZero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Array3d p = log_probs(t, x[i]).exp();
    const Eigen::Vector2d z(1.0, x[i]);
    const Eigen::Matrix2d zz = z * z.transpose();
    for (int k = 1; k <= 2; ++k) {
      const double indicator = index_of(y[i]) == k ? 1.0 : 0.0;
      grad.segment<2>(2 * (k - 1)) += (indicator - p[k]) * z;
      for (int l = 1; l <= 2; ++l) {
        const double w = p[k] * ((k == l ? 1.0 : 0.0) - p[l]);
        hess.block<2, 2>(2 * (k - 1), 2 * (l - 1)) -= w * zz;
      }
    }
  }
}

}  // namespace

double mnl_log_likelihood(const MnlCoefficients& coef, std::span<const double> x,
                          std::span<const ClassLabel> y) {
  Vec4 t;
  t << coef.intercept[0], coef.slope[0], coef.intercept[1], coef.slope[1];
  return log_likelihood(t, x, y);
}

Vector3 mnl_predict_probs(const MnlCoefficients& coef, double x) {
  Vec4 t;
  t << coef.intercept[0], coef.slope[0], coef.intercept[1], coef.slope[1];
  return log_probs(t, x).exp().matrix();
}

MnlFit mnl_fit(std::span<const double> x, std::span<const ClassLabel> y, const MnlOptions& opts) {
  if (x.size() != y.size()) throw InputError("mnl_fit: x and y differ in length");
  if (x.size() < 10) throw InputError("mnl_fit: need at least 10 observations");
  Eigen::Array3d class_counts = Eigen::Array3d::Zero();
  for (auto c : y) class_counts[index_of(c)] += 1;
  if ((class_counts == 0).any()) throw InputError("mnl_fit: every class must be present");

  MnlFit fit;
  fit.n = x.size();
  Vec4 theta = Vec4::Zero();
  double ll = log_likelihood(theta, x, y);
  fit.ll_history.push_back(ll);
  Vec4 grad;
  Mat4 hess;
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    gradient_hessian(theta, x, y, grad, hess);
    const Mat4 neg = -hess + opts.ridge * Mat4::Identity();
    const Vec4 step = neg.ldlt().solve(grad);
    if (!step.allFinite()) throw MnlConvergenceError("mnl_fit: singular Hessian");
    double scale = 1.0;
    Vec4 candidate = theta + step;
    double cand_ll = log_likelihood(candidate, x, y);
    while (!(cand_ll >= ll) && scale > 1e-10) {
      scale *= 0.5;
      candidate = theta + scale * step;
      cand_ll = log_likelihood(candidate, x, y);
    }
    if (!(cand_ll >= ll)) {
      // No ascent along the Newton direction: we are at the optimum to
      // working precision.
      converged = true;
      break;
    }
    const double moved = (candidate - theta).cwiseAbs().maxCoeff();
    theta = candidate;
    ll = cand_ll;
    fit.ll_history.push_back(ll);
    if (theta.norm() > opts.separation_bound) {
      throw MnlConvergenceError("mnl_fit: parameters diverge (perfect or quasi-separation)");
    }
    if (moved < opts.step_tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) throw MnlConvergenceError("mnl_fit: no convergence within iteration limit");

  gradient_hessian(theta, x, y, grad, hess);
  fit.iterations = iter;
  fit.gradient_norm = grad.norm();
  fit.coef = unpack(theta);
  fit.log_likelihood = ll;
  const double n = static_cast<double>(x.size());
  fit.null_log_likelihood = (class_counts * (class_counts / n).log()).sum();
  fit.llr_chi2 = 2.0 * (fit.log_likelihood - fit.null_log_likelihood);
  const boost::math::chi_squared chi2(2.0);
  fit.llr_p_value = boost::math::cdf(boost::math::complement(chi2, std::max(0.0, fit.llr_chi2)));

  const Mat4 cov = (-hess).inverse();
  auto se = [&](int i) { return std::sqrt(std::max(0.0, cov(i, i))); };
  auto wald_p = [](double b, double s) { return s > 0 ? 2.0 * normal_sf(std::abs(b / s)) : 1.0; };
  fit.intercept_se << se(0), se(2);
  fit.slope_se << se(1), se(3);
  for (int k = 0; k < 2; ++k) {
    fit.intercept_p[k] = wald_p(fit.coef.intercept[k], fit.intercept_se[k]);
    fit.slope_p[k] = wald_p(fit.coef.slope[k], fit.slope_se[k]);
  }
  return fit;
}

std::string format_mnl_table(const MnlFit& fit, double mean_x) {
  std::string out = ",AVG,Prediction = C1,Prediction = C2\n";
  out += "coef,," + format_fixed(fit.coef.intercept[0], 4) + " (" + format_fixed(fit.intercept_p[0], 4) +
         ")," + format_fixed(fit.coef.intercept[1], 4) + " (" + format_fixed(fit.intercept_p[1], 4) + ")\n";
  out += "yield," + format_fixed(mean_x, 3) + "," + format_fixed(fit.coef.slope[0], 4) + " (" +
         format_fixed(fit.slope_p[0], 4) + ")," + format_fixed(fit.coef.slope[1], 4) + " (" +
         format_fixed(fit.slope_p[1], 4) + ")\n";
  out += "LL," + format_fixed(fit.log_likelihood, 3) + "\n";
  out += "LLR chi2," + format_fixed(fit.llr_chi2, 3) + " (" + format_fixed(fit.llr_p_value, 4) + ")\n";
  return out;
}

}  // namespace chartfolio
