#include "firesale/stability.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "firesale/format.hpp"
#include "firesale/special_functions.hpp"

namespace firesale {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// One power-iteration run at a fixed diagonal shift. Returns the (shifted)
// dominant eigenvalue, 0 when the operator annihilates the iterate, or
// nothing if the residual never settles.
std::optional<double> power_iterate(const ApplyFn& apply, int dim, double tol, double shift,
                                    int max_iterations) {
  std::vector<double> v(dim, 1.0 / dim), w(dim);
  double inv_norm = 1.0 / std::sqrt(dot(v, v));
  for (double& x : v) x *= inv_norm;

  for (int it = 0; it < max_iterations; ++it) {
    apply(v, w);
    if (shift > 0.0)
      for (int i = 0; i < dim; ++i) w[i] += shift * v[i];
    const double eigenvalue = dot(v, w);  // v has unit norm
    double residual2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double r = w[i] - eigenvalue * v[i];
      residual2 += r * r;
    }
    if (std::sqrt(residual2) <= tol * std::max(1.0, std::abs(eigenvalue)))
      return eigenvalue;
    const double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) return 0.0;  // nilpotent action, spectral radius 0
    inv_norm = 1.0 / norm;
    for (int i = 0; i < dim; ++i) v[i] = w[i] * inv_norm;
  }
  return std::nullopt;
}

}  // namespace

double largest_eigenvalue_matvec(const ApplyFn& apply, int dim, double tol,
                                 double shift_scale, int max_iterations) {
  if (dim < 1) throw std::invalid_argument("largest_eigenvalue: dimension must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("largest_eigenvalue: tol must be > 0");

  if (auto plain = power_iterate(apply, dim, tol, 0.0, max_iterations)) return *plain;
  // Stalled, typically an eigenvalue tie from periodic structure. A positive
  // diagonal shift separates the Perron root from the rest of the spectrum.
  const double shift = 0.5 * shift_scale > 0.0 ? 0.5 * shift_scale : 1.0;
  if (auto damped = power_iterate(apply, dim, tol, shift, max_iterations))
    return *damped - shift;
  throw std::runtime_error("largest_eigenvalue: power iteration did not converge");
}

double largest_eigenvalue(const SquareMatrix& matrix, double tol) {
  const int dim = matrix.dim();
  double max_row_sum = 0.0;
  for (int r = 0; r < dim; ++r) {
    double row = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double e = matrix.at(r, c);
      if (e < 0.0) throw std::invalid_argument("largest_eigenvalue: negative entry");
      row += e;
    }
    max_row_sum = std::max(max_row_sum, row);
  }
  auto apply = [&matrix, dim](const std::vector<double>& x, std::vector<double>& y) {
    for (int r = 0; r < dim; ++r) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c) s += matrix.at(r, c) * x[c];
      y[r] = s;
    }
  };
  return largest_eigenvalue_matvec(apply, dim, tol, max_row_sum);
}

bool StabilityMatrixExact::entry(int i, int j) const {
  const auto& t = triggered[j];
  return std::binary_search(t.begin(), t.end(), i);
}

StabilityMatrixExact stability_matrix_exact(const FinancialSystem& sys, double tol) {
  const int n_banks = sys.network.n_banks;
  StabilityMatrixExact result;
  result.n_banks = n_banks;
  result.triggered.resize(n_banks);

  // Per-asset holder shares aligned with asset_holders (both built in
  // ascending bank order).
  std::vector<std::vector<double>> holder_shares(sys.network.n_assets);
  for (int a = 0; a < sys.network.n_assets; ++a)
    holder_shares[a].reserve(sys.network.asset_holders[a].size());
  for (int bank = 0; bank < n_banks; ++bank) {
    const auto& portfolio = sys.network.bank_portfolios[bank];
    const auto& shares = sys.sheets[bank].shares;
    for (std::size_t s = 0; s < portfolio.size(); ++s)
      holder_shares[portfolio[s]].push_back(shares[s]);
  }

  std::vector<double> loss(n_banks, 0.0);
  std::vector<int> hit;
  for (int j = 0; j < n_banks; ++j) {
    const auto& portfolio = sys.network.bank_portfolios[j];
    const auto& shares = sys.sheets[j].shares;
    hit.clear();
    for (std::size_t s = 0; s < portfolio.size(); ++s) {
      const int asset = portfolio[s];
      const double total = sys.market.total_shares[asset];
      if (total <= 0.0) continue;
      const double fraction = std::min(1.0, shares[s] / total);
      const double drop = sys.market.initial_prices[asset] * -std::expm1(-sys.impact.alpha * fraction);
      const auto& holders = sys.network.asset_holders[asset];
      const auto& hshares = holder_shares[asset];
      for (std::size_t t = 0; t < holders.size(); ++t) {
        const int i = holders[t];
        if (i == j) continue;
        if (loss[i] == 0.0) hit.push_back(i);
        loss[i] += hshares[t] * drop;
      }
    }
    auto& out = result.triggered[j];
    for (int i : hit) {
      if (loss[i] > sys.sheets[i].initial_equity) out.push_back(i);
      loss[i] = 0.0;
    }
    std::sort(out.begin(), out.end());
  }

  std::size_t max_row = 0;
  {
    std::vector<std::size_t> row_counts(n_banks, 0);
    for (const auto& t : result.triggered)
      for (int i : t) ++row_counts[i];
    for (auto c : row_counts) max_row = std::max(max_row, c);
  }
  auto apply = [&result, n_banks](const std::vector<double>& x, std::vector<double>& y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int j = 0; j < n_banks; ++j)
      for (int i : result.triggered[j]) y[i] += x[j];
  };
  result.spectral_radius =
      largest_eigenvalue_matvec(apply, n_banks, tol, static_cast<double>(max_row));
  return result;
}

int sample_size_biased_degree(Rng& rng, double mu_b) {
  if (!(mu_b > 0.0))
    throw std::invalid_argument("sample_size_biased_degree: mu_b must be > 0");
  return 1 + sample_poisson(rng, mu_b);
}

double estimate_F(int h, int k, int ell, double lambda, double alpha, double mu_b,
                  int samples, std::uint64_t seed) {
  if (h < 1 || k < 1) throw std::invalid_argument("estimate_F: degrees must be >= 1");
  if (ell < 2) throw std::invalid_argument("estimate_F: ell must be >= 2");
  if (!(lambda > 0.0) || !(alpha > 0.0) || !(mu_b > 0.0) || samples < 1)
    throw std::invalid_argument("estimate_F: bad parameters");
  if (h >= lambda) return 0.0;  // loss is capped at A0/h <= E0

  const double equity_over_risky = 1.0 / lambda;
  Rng rng(seed);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    double recip_sum = 0.0;
    for (int i = 0; i < ell - 2; ++i)
      recip_sum += 1.0 / sample_size_biased_degree(rng, mu_b);
    const double liquidated = (1.0 / k) / (1.0 / h + 1.0 / k + recip_sum);
    const double loss = (1.0 / h) * -std::expm1(-alpha * liquidated);
    if (loss > equity_over_risky) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

FailureKernel::FailureKernel(double mu_b, int samples, std::uint64_t seed, int max_extra_banks)
    : mu_b_(mu_b), samples_(samples), sums_(std::max(0, max_extra_banks)) {
  if (!(mu_b > 0.0)) throw std::invalid_argument("FailureKernel: mu_b must be > 0");
  if (samples < 1) throw std::invalid_argument("FailureKernel: samples must be >= 1");
  for (auto& v : sums_) v.resize(samples);
  for (int s = 0; s < samples; ++s) {
    Rng rng(derive_seed(seed, {0x6b65726eull, static_cast<std::uint64_t>(s)}));
    double sum = 0.0;
    for (std::size_t j = 0; j < sums_.size(); ++j) {
      sum += 1.0 / sample_size_biased_degree(rng, mu_b_);
      sums_[j][s] = sum;
    }
  }
  for (auto& v : sums_) std::sort(v.begin(), v.end());
}

double FailureKernel::cdf_below(int ell, double s_star) const {
  if (ell < 2) throw std::invalid_argument("FailureKernel: ell must be >= 2");
  if (s_star <= 0.0) return 0.0;
  const int extra = ell - 2;
  if (extra == 0) return 1.0;
  if (extra > static_cast<int>(sums_.size()))
    throw std::out_of_range("FailureKernel: ell beyond sampled range");
  const auto& v = sums_[extra - 1];
  const auto below = std::lower_bound(v.begin(), v.end(), s_star) - v.begin();
  return static_cast<double>(below) / samples_;
}

namespace {

void check_branching_params(const BranchingParams& p) {
  if (!(p.mu_b > 0.0) || !(p.n > 0.0) || !(p.lambda > 0.0) || !(p.alpha > 0.0))
    throw std::invalid_argument("branching_matrix: parameters must be positive");
}

// Poisson asset-degree weights ell (ell-1) P_a(ell) for ell = 2, 3, ...;
// the tail is cut once past the mode when a term falls below
// cutoff * (running sum). w[i] corresponds to ell = i + 2.
std::vector<double> ell_weights(double mu_a, double cutoff) {
  std::vector<double> w;
  double running = 0.0;
  constexpr int hard_cap = 100000;
  for (int ell = 2; ell <= hard_cap; ++ell) {
    const double weight = ell * (ell - 1.0) * poisson_pmf(ell, mu_a);
    w.push_back(weight);
    running += weight;
    if (ell > mu_a + 2.0 && weight < cutoff * running) break;
  }
  return w;
}

BranchingMatrix assemble_branching(const BranchingParams& params, const BranchingOptions& opts,
                                   const FailureKernel& kernel, const std::vector<double>& w) {
  BranchingMatrix bm;
  bm.entries = SquareMatrix(opts.k_max);
  bm.params = params;
  bm.k_max = opts.k_max;
  bm.mc_samples = opts.samples;
  bm.seed = opts.seed;

  const double mu_b = params.mu_b;
  for (int h = 1; h <= opts.k_max; ++h) {
    if (h >= params.lambda) continue;  // a degree-h bank cannot fail through one asset
    const double x_star = -std::log1p(-h / params.lambda) / params.alpha;
    const double row_prefactor = poisson_pmf(h, mu_b) * h / (mu_b * mu_b * params.n);
    for (int k = 2; k <= opts.k_max; ++k) {
      // Failure condition in terms of the co-holders' reciprocal degree sum.
      const double s_star = (1.0 / k) / x_star - 1.0 / h - 1.0 / k;
      if (s_star <= 0.0) break;  // s_star decreases in k, rest of row is 0
      double ell_sum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double F = kernel.cdf_below(static_cast<int>(i) + 2, s_star);
        if (F == 0.0) break;  // F is nonincreasing in ell on shared samples
        ell_sum += w[i] * F;
      }
      bm.entries.at(h - 1, k - 1) = row_prefactor * (k - 1.0) * ell_sum;
    }
  }
  bm.spectral_radius = largest_eigenvalue(bm.entries, 1e-10);
  return bm;
}

}  // namespace

int kernel_extra_banks(double mu_a, double ell_weight_cutoff) {
  return static_cast<int>(ell_weights(mu_a, ell_weight_cutoff).size()) - 1;
}

void write_branching_csv(std::ostream& out, const BranchingMatrix& matrix) {
  out << "h,k,value\n";
  for (int h = 1; h <= matrix.k_max; ++h)
    for (int k = 1; k <= matrix.k_max; ++k) {
      const double v = matrix.entries.at(h - 1, k - 1);
      if (v != 0.0) out << h << ',' << k << ',' << format_double(v) << '\n';
    }
}

BranchingMatrix branching_matrix(const BranchingParams& params, const BranchingOptions& opts) {
  check_branching_params(params);
  if (opts.k_max < 1 || opts.samples < 1)
    throw std::invalid_argument("branching_matrix: k_max and samples must be >= 1");
  const auto w = ell_weights(params.mu_b * params.n, opts.ell_weight_cutoff);
  const FailureKernel kernel(params.mu_b, opts.samples, opts.seed,
                             static_cast<int>(w.size()) - 1);
  return assemble_branching(params, opts, kernel, w);
}

BranchingMatrix branching_matrix(const BranchingParams& params, const BranchingOptions& opts,
                                 const FailureKernel& kernel) {
  check_branching_params(params);
  if (opts.k_max < 1 || opts.samples < 1)
    throw std::invalid_argument("branching_matrix: k_max and samples must be >= 1");
  const auto w = ell_weights(params.mu_b * params.n, opts.ell_weight_cutoff);
  if (static_cast<int>(w.size()) - 1 > static_cast<int>(kernel.max_ell()) - 2)
    throw std::out_of_range("branching_matrix: kernel covers too few co-holders for this mu_a");
  return assemble_branching(params, opts, kernel, w);
}

double regular_branching_number(int k, double n, double lambda, double alpha,
                                double ell_weight_cutoff) {
  if (k < 1) throw std::invalid_argument("regular_branching_number: k must be >= 1");
  if (!(n > 0.0) || !(lambda > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("regular_branching_number: parameters must be positive");
  if (k >= lambda) return 0.0;

  // All co-holders have degree k, so the liquidated fraction of a degree-ell
  // asset is exactly 1/ell and F is a sharp threshold in ell.
  const double mu_a = k * n;
  const auto w = ell_weights(mu_a, ell_weight_cutoff);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int ell = static_cast<int>(i) + 2;
    const double loss = (1.0 / k) * -std::expm1(-alpha / ell);
    if (loss > 1.0 / lambda) sum += w[i];
  }
  return (k - 1.0) / (k * n) * sum;
}

BranchingMatrix branching_matrix_regular(int k, double n, double lambda, double alpha,
                                         int k_max) {
  if (k < 1 || k > k_max)
    throw std::invalid_argument("branching_matrix_regular: need 1 <= k <= k_max");
  if (!(n > 0.0) || !(lambda > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("branching_matrix_regular: parameters must be positive");

  BranchingMatrix bm;
  bm.entries = SquareMatrix(k_max);
  bm.params = {static_cast<double>(k), n, lambda, alpha};
  bm.k_max = k_max;

  if (k < lambda) {
    const auto w = ell_weights(k * n, 1e-12);
    const double row_prefactor = 1.0 / (k * n);  // P_b(h) = delta_{h,k}
    for (int kp = 2; kp <= k_max; ++kp) {
      double sum = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const int ell = static_cast<int>(i) + 2;
        const double liquidated = (1.0 / kp) / (1.0 / k + 1.0 / kp + (ell - 2.0) / k);
        const double loss = (1.0 / k) * -std::expm1(-alpha * liquidated);
        if (loss > 1.0 / lambda) sum += w[i];
      }
      bm.entries.at(k - 1, kp - 1) = row_prefactor * (kp - 1.0) * sum;
    }
  }
  bm.spectral_radius = largest_eigenvalue(bm.entries, 1e-10);
  return bm;
}

namespace {

double xi1_from_lstar(int k, double mu_b, double n, double l_star) {
  const double s = l_star - 1.0;
  if (s <= 0.0) return 0.0;  // failure threshold below the minimum co-holder count
  return (k - 1.0) * mu_b * n * gamma_q(s, mu_b * n);
}

void check_closed_form_args(int k, double mu_b, double n, double lambda) {
  if (k < 1) throw std::invalid_argument("closed_form_xi1: k must be >= 1");
  if (!(mu_b > 0.0) || !(n > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("closed_form_xi1: parameters must be positive");
}

}  // namespace

double closed_form_xi1(int k, double mu_b, double n, double lambda) {
  check_closed_form_args(k, mu_b, n, lambda);
  if (k == 1 || k >= lambda) return 0.0;
  const double l_star = 1.0 / std::log(lambda / (lambda - k));
  return xi1_from_lstar(k, mu_b, n, l_star);
}

double closed_form_xi1_alpha(int k, double mu_b, double n, double lambda, double alpha) {
  check_closed_form_args(k, mu_b, n, lambda);
  if (!(alpha > 0.0)) throw std::invalid_argument("closed_form_xi1_alpha: alpha must be > 0");
  if (k == 1 || k >= lambda) return 0.0;
  const double l_star = alpha / std::log(lambda / (lambda - k));
  return xi1_from_lstar(k, mu_b, n, l_star);
}

namespace {

BranchingParams with_axis(BranchingParams p, PhaseAxis axis, double value) {
  switch (axis) {
    case PhaseAxis::MuB: p.mu_b = value; break;
    case PhaseAxis::Crowding: p.n = value; break;
    case PhaseAxis::Leverage: p.lambda = value; break;
  }
  return p;
}

}  // namespace

double xi1_along(const BranchingParams& base, PhaseAxis axis, double value,
                 const BranchingOptions& opts) {
  return branching_matrix(with_axis(base, axis, value), opts).spectral_radius;
}

double phase_boundary(const BranchingParams& fixed, PhaseAxis axis, double lo, double hi,
                      double tol, const BranchingOptions& opts) {
  if (!(lo < hi)) throw std::invalid_argument("phase_boundary: need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("phase_boundary: tol must be > 0");

  // On the leverage axis the degree samples and ell weights are invariant,
  // so one kernel serves the whole bisection.
  std::optional<FailureKernel> kernel;
  if (axis == PhaseAxis::Leverage)
    kernel.emplace(fixed.mu_b, opts.samples, opts.seed,
                   kernel_extra_banks(fixed.mu_b * fixed.n, opts.ell_weight_cutoff));
  auto eval = [&](double v) {
    const auto p = with_axis(fixed, axis, v);
    return kernel ? branching_matrix(p, opts, *kernel).spectral_radius
                  : branching_matrix(p, opts).spectral_radius;
  };

  double f_lo = eval(lo) - 1.0;
  double f_hi = eval(hi) - 1.0;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo < 0.0) == (f_hi < 0.0))
    throw std::runtime_error("phase_boundary: xi1 - 1 does not change sign on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = eval(mid) - 1.0;
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace firesale
