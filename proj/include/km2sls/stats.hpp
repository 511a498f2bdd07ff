#pragma once

namespace km2sls {

// Standard normal CDF Phi(z).
double normal_cdf(double z);

// Standard normal quantile Phi^{-1}(p) for p in (0,1).
// Accurate to well below 1e-9 across the open interval.
double normal_quantile(double p);

// Two-sided p-value for a standard normal test statistic.
double two_sided_p_value(double z);

}  // namespace km2sls
