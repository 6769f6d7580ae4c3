#include "firesale/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace firesale {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;

// exp(-x + s ln x - ln Gamma(s)), the common prefactor of both expansions.
double prefactor(double s, double x) {
  return std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double lower_series(double s, double x) {
  double ap = s;
  double term = 1.0 / s;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * prefactor(s, x);
  }
  throw std::runtime_error("gamma_p: series did not converge");
}

// Continued fraction for Q(s,x), modified Lentz.
double upper_cf(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h * prefactor(s, x);
  }
  throw std::runtime_error("gamma_q: continued fraction did not converge");
}

void check_domain(double s, double x, const char* who) {
  if (!(s > 0.0)) throw std::invalid_argument(std::string(who) + ": s must be > 0");
  if (!(x >= 0.0)) throw std::invalid_argument(std::string(who) + ": x must be >= 0");
}

}  // namespace

double gamma_p(double s, double x) {
  check_domain(s, x, "gamma_p");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return lower_series(s, x);
  return 1.0 - upper_cf(s, x);
}

double gamma_q(double s, double x) {
  check_domain(s, x, "gamma_q");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - lower_series(s, x);
  return upper_cf(s, x);
}

double poisson_pmf(int k, double mean) {
  if (k < 0) return 0.0;
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0));
}

}  // namespace firesale
