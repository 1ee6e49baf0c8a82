#pragma once

#include <cstdint>

namespace vrmrf::stats {

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// Series expansion for x < a + 1, Lentz continued fraction otherwise.
// Absolute error below 1e-12 over the ranges used here (a <= 25, x <= 250).
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution with df degrees of
// freedom: P(X > x) = Q(df/2, x/2). Returns 1 at x <= 0.
double chi_square_sf(double x, int df);

}  // namespace vrmrf::stats
