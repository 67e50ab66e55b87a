// Standard normal density, distribution and quantile functions.
#pragma once

namespace hybridcop::normal {

double pdf(double z);
double cdf(double z);

/// Inverse of cdf on (0, 1). Acklam's rational approximation followed by one
/// Halley refinement step; absolute error below 1e-12 over (1e-300, 1 - 1e-16).
/// Returns -inf / +inf at 0 / 1.
double quantile(double p);

}  // namespace hybridcop::normal
