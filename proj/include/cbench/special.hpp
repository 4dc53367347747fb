#pragma once

namespace cbench {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) noexcept;
/// Standard normal CDF, Φ(x) = erfc(-x/√2)/2. Relative accuracy near machine precision
/// in both tails.
double normal_cdf(double x) noexcept;
/// Φ⁻¹(p) for p in (0,1): rational initial guess refined by two Halley steps.
double normal_quantile(double p);
/// CDF of |Z|, Z ~ N(0,1): 2Φ(t) − 1 for t ≥ 0, zero otherwise.
double half_normal_cdf(double t) noexcept;

/// Upper tail P(χ²_dof > x) through the regularized incomplete gamma function.
double chi_square_upper_tail(double x, double dof);

}  // namespace cbench
