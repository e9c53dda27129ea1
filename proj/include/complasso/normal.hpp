#pragma once

namespace complasso {

// Standard normal CDF.
double normal_cdf(double x);

// 1 - normal_cdf(x), accurate in the far upper tail.
double normal_upper_tail(double x);

// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy about
// 1e-16 over (0, 1). Throws InvalidInput outside the open unit interval.
double normal_quantile(double prob);

}  // namespace complasso
