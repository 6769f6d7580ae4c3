#pragma once

namespace firesale {

// Regularized incomplete gamma functions, P(s,x) = gamma(s,x)/Gamma(s) and
// Q(s,x) = Gamma(s,x)/Gamma(s) = 1 - P(s,x), for s > 0, x >= 0.
// Lower series for x < s+1, continued fraction otherwise; relative error
// is well below 1e-10 across that split.
double gamma_p(double s, double x);
double gamma_q(double s, double x);

// Poisson pmf exp(-mean) mean^k / k!, evaluated in log space.
double poisson_pmf(int k, double mean);

}  // namespace firesale
