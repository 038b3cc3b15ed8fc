#pragma once

namespace hck {

// Standard normal CDF, Phi(x).
double normal_cdf(double x);

// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);

// Inverse standard normal CDF. Rational approximation refined by one Halley
// step against erfc; absolute error below 1e-9 on [1e-12, 1 - 1e-12].
// Throws std::domain_error unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace hck
