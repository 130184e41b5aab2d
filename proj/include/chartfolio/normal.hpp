#pragma once

namespace chartfolio {

double normal_pdf(double x) noexcept;
/// Standard normal CDF via erfc; accurate in both tails.
double normal_cdf(double x) noexcept;
/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x) noexcept;
/// Inverse standard normal CDF. Acklam's rational approximation followed by a
/// Halley step, giving near full double precision for p in (0, 1), including
/// the far tails. Returns -inf/+inf at 0/1.
double normal_quantile(double p) noexcept;

}  // namespace chartfolio
