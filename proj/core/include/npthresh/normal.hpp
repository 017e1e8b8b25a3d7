#pragma once

namespace npthresh {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile function (Wichura's AS 241, double precision).
// Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace npthresh
