#pragma once

// Brute-force reference implementations used only by the tests. Everything
// here is written as plain nested loops over flat vectors, independent of
// the library's internals, so agreement is a meaningful check. Clamping
// rules (density floors, variance floors) are part of the contracts and are
// mirrored here.

#include <array>
#include <vector>

#include "npthresh/types.hpp"

namespace oracle {

struct Data {
  std::vector<double> y;
  std::vector<std::vector<double>> x;  // x[i] is row i
  std::vector<double> q;
  int n = 0;
  int p = 0;
};

struct Params {
  double h = 0.0;
  int p = 1;
  double density_floor = 1e-10;
};

Data from_sample(const npthresh::Sample& s);

double kernel(const std::vector<double>& u);
bool in_interval(double q, double lo, double hi);
bool in_box(const std::vector<double>& x, const std::vector<double>& lo,
            const std::vector<double>& hi);

double density(const Data& d, double lo, double hi,
               const std::vector<double>& at, const Params& prm);
double nw(const Data& d, double lo, double hi, const std::vector<double>& at,
          const Params& prm);
double cond_var(const Data& d, double lo, double hi,
                const std::vector<double>& at, const Params& prm);

double ssr(const Data& d, const std::vector<double>& thresholds,
           const Params& prm);

double gamma_tilde(const Data& d, double lo, double hi, double tau,
                   const Params& prm, const std::vector<double>& box_lo,
                   const std::vector<double>& box_hi);
double xi_hat(const Data& d, double lo, double hi, double tau,
              const Params& prm, const std::vector<double>& box_lo,
              const std::vector<double>& box_hi);
double sigma2_hat(const Data& d, double lo, double hi, double tau,
                  const Params& prm, const std::vector<double>& box_lo,
                  const std::vector<double>& box_hi);
// sigma1^2 + sigma2^2 without the 2*C3 factor (covariance normalizer).
double variance_bracket(const Data& d, double lo, double hi, double tau,
                        const Params& prm, const std::vector<double>& box_lo,
                        const std::vector<double>& box_hi);
std::array<double, 9> cov_terms(const Data& d, double lo, double hi,
                                double tau_l, double tau_k, const Params& prm,
                                const std::vector<double>& box_lo,
                                const std::vector<double>& box_hi);
double cov(const Data& d, double lo, double hi, double tau_l, double tau_k,
           const Params& prm, const std::vector<double>& box_lo,
           const std::vector<double>& box_hi);

double delta_hat(const Data& d, double lo, double hi, double tau,
                 const Params& prm, const std::vector<double>& box_lo,
                 const std::vector<double>& box_hi);

// Z statistic for a given candidate set, assembling the correlation matrix
// exactly as the contract states (unit diagonal, mirrored off-diagonals,
// eigenvalue floor) but with an independent Jacobi eigensolver.
double z_statistic(const Data& d, double lo, double hi,
                   const std::vector<double>& taus, const Params& prm,
                   const std::vector<double>& box_lo,
                   const std::vector<double>& box_hi);

// Cyclic Jacobi eigendecomposition of a symmetric matrix; a = V diag(w) V^T.
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& w,
                  std::vector<std::vector<double>>& v);

std::vector<std::vector<double>> inv_sqrt(
    const std::vector<std::vector<double>>& a, double eig_floor);

}  // namespace oracle
