#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "firesale/balance.hpp"
#include "firesale/rng.hpp"

namespace firesale {

// Dense square nonnegative matrix, row major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, 0.0) {}
  int dim() const { return dim_; }
  double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * dim_ + col]; }
  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * dim_ + col]; }
  const std::vector<double>& data() const { return data_; }

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

// Perron root by power iteration from the uniform positive vector. Returns 0
// for matrices that annihilate every iterate (zero or nilpotent action).
// When convergence stalls (eigenvalue ties from periodic structure), a
// diagonal damping shift is applied and subtracted from the result. Throws
// std::runtime_error if even the damped run fails to converge.
double largest_eigenvalue(const SquareMatrix& matrix, double tol = 1e-10);

// Generic form for matrix-free operators; `shift_scale` controls the damping
// magnitude and should be comparable to the largest row sum.
double largest_eigenvalue_matvec(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    int dim, double tol, double shift_scale, int max_iterations = 20000);

// Exact single-failure stability matrix of a concrete system: entry (i, j)
// is 1 when liquidating bank j's entire portfolio at initial prices pushes
// bank i's loss above its equity. Stored sparsely as, per bank j, the list
// of banks it would topple.
struct StabilityMatrixExact {
  int n_banks = 0;
  std::vector<std::vector<int>> triggered;  // triggered[j] = ascending bank ids
  double spectral_radius = 0.0;

  bool entry(int i, int j) const;
};
StabilityMatrixExact stability_matrix_exact(const FinancialSystem& sys, double tol = 1e-10);

// Degree of a bank reached by following a uniform random link when bank
// degrees are Poisson(mu_b): distributed as 1 + Poisson(mu_b).
int sample_size_biased_degree(Rng& rng, double mu_b);

// Probability that a degree-h bank fails when a degree-k co-holder of one of
// its assets (held by ell banks in total) is liquidated, averaged by direct
// Monte Carlo over the ell-2 remaining co-holder degrees.
double estimate_F(int h, int k, int ell, double lambda, double alpha, double mu_b,
                  int samples, std::uint64_t seed);

// Shared sample pool for the failure probability: the failure condition is
// equivalent to sum_i 1/m_i < s*(h, k), so one set of sorted prefix sums of
// reciprocal size-biased degrees serves every (h, k, ell) query.
class FailureKernel {
 public:
  FailureKernel(double mu_b, int samples, std::uint64_t seed, int max_extra_banks);

  // P[ sum of (ell-2) reciprocal degrees < s_star ]
  double cdf_below(int ell, double s_star) const;
  // Largest asset degree this kernel can serve.
  int max_ell() const { return static_cast<int>(sums_.size()) + 2; }
  double mu_b() const { return mu_b_; }
  int samples() const { return samples_; }

 private:
  double mu_b_;
  int samples_;
  std::vector<std::vector<double>> sums_;  // sums_[j-1] = sorted S_j, j >= 1
};

struct BranchingParams {
  double mu_b = 5.0;
  double n = 1.0;  // crowding N/M
  double lambda = 20.0;
  double alpha = 1.0536;
};

struct BranchingOptions {
  int k_max = 200;
  int samples = 10000;
  std::uint64_t seed = 1;
  double ell_weight_cutoff = 1e-12;  // relative tail cutoff for the ell sum
};

// Expected-offspring matrix of the degree-typed branching process: entry
// (h, k) is the expected number of degree-h banks whose failure is directly
// triggered by the failure of a degree-k bank. Indices are 1-based degrees,
// stored at entries.at(h-1, k-1).
struct BranchingMatrix {
  SquareMatrix entries;
  BranchingParams params;
  int k_max = 0;
  int mc_samples = 0;
  std::uint64_t seed = 0;
  double spectral_radius = 0.0;
};

BranchingMatrix branching_matrix(const BranchingParams& params, const BranchingOptions& opts);
// Same, but with a caller-provided kernel (reused across leverage scans).
BranchingMatrix branching_matrix(const BranchingParams& params, const BranchingOptions& opts,
                                 const FailureKernel& kernel);

// Co-holder count a kernel must cover so the ell sum at mean asset degree
// mu_a is complete up to the tail cutoff.
int kernel_extra_banks(double mu_a, double ell_weight_cutoff = 1e-12);

// Sparse CSV dump "h,k,value" of the nonzero matrix entries.
void write_branching_csv(std::ostream& out, const BranchingMatrix& matrix);

// Degree-regular banks: all bank degrees equal k, asset degrees Poisson(k n).
// The offspring matrix collapses to a single nonzero row, so its Perron root
// is the scalar branching number below; the matrix form is kept for
// cross-checks.
double regular_branching_number(int k, double n, double lambda, double alpha,
                                double ell_weight_cutoff = 1e-12);
BranchingMatrix branching_matrix_regular(int k, double n, double lambda, double alpha,
                                         int k_max = 200);

// Closed-form largest eigenvalue for degree-regular banks,
//   xi1 = (k-1) mu_b n Gamma(l*-1, mu_b n) / Gamma(l*-1),
// with l* = 1 / log(lambda / (lambda - k)). Returns 0 for k = 1, for
// k >= lambda (such banks cannot fail through one asset), and for l* <= 1
// (the failure threshold falls below the minimum co-holder count).
double closed_form_xi1(int k, double mu_b, double n, double lambda);
// Variant with the market-impact strength folded into the threshold,
// l* -> alpha l*; kept alongside the plain form so the two can be compared
// against the Monte Carlo matrix.
double closed_form_xi1_alpha(int k, double mu_b, double n, double lambda, double alpha);

enum class PhaseAxis { MuB, Crowding, Leverage };

// xi1 as a function of one parameter with the other two fixed.
double xi1_along(const BranchingParams& base, PhaseAxis axis, double value,
                 const BranchingOptions& opts);

// Bisection solve of xi1(axis) = 1 on [lo, hi] to interval width tol.
// Requires xi1(lo) and xi1(hi) to bracket 1; throws std::runtime_error
// otherwise. Every xi1 evaluation reuses the same seeds, so the scan is
// deterministic and monotone parameter sweeps stay monotone.
double phase_boundary(const BranchingParams& fixed, PhaseAxis axis, double lo, double hi,
                      double tol, const BranchingOptions& opts);

}  // namespace firesale
