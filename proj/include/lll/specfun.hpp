#ifndef LLL_SPECFUN_HPP
#define LLL_SPECFUN_HPP

#include "lll/common.hpp"

namespace lll::specfun {

/// Jacobi theta function on the lattice Z + tau*Z,
///   theta(z) = -i sum_n (-1)^n exp(i pi tau (n+1/2)^2) exp(i (2n+1) pi z),
/// summed in symmetric pairs (n, -n-1) until the Gaussian tail bound
/// exp(-pi Im(tau) (n+1/2)^2 + 2 pi |Im z| (2n+1)) falls below policy.eps.
/// Vanishes exactly on the lattice, is odd, and satisfies
/// theta(z+1) = -theta(z), theta(z+tau) = theta_quasi_period(z,tau)*theta(z).
cplx theta(cplx z, cplx tau, const TruncationPolicy& policy = {});

/// Multiplier -exp(-i pi tau) exp(-2 i pi z) of the tau-direction
/// quasi-periodicity of theta.
cplx theta_quasi_period(cplx z, cplx tau);

enum class SumParity { all, odd };

/// Gaussian lattice sums T_n = sum_q q^n exp(-pi^2 q^2 / gamma^2), over all
/// integers q or odd q only. Odd orders vanish exactly (terms are paired
/// over +-q before summation).
double gauss_sum(int order, double gamma, SumParity parity,
                 const TruncationPolicy& policy = {});

/// The 1-periodic cosine series
///   ell(xi) = 1 + 2 sum_{k>=1} exp(-pi^2 k^2/gamma^2) cos(2 pi k xi)
/// and its term-wise derivatives up to order 4.
double symbol_ell(double xi, double gamma, int deriv = 0,
                  const TruncationPolicy& policy = {});

/// Odd-index subsum h(xi) = 2 sum_{k>=0} q^{(2k+1)^2} cos(2(2k+1) pi xi).
double symbol_h(double xi, double gamma, int deriv = 0,
                const TruncationPolicy& policy = {});

/// Even-index subsum g = ell - h, i.e. 1 + 2 sum_{k>=1} q^{4k^2} cos(4 pi k xi).
double symbol_g(double xi, double gamma, int deriv = 0,
                const TruncationPolicy& policy = {});

/// ell(xi) - ell(0) evaluated as -4 sum q^{k^2} sin^2(pi k xi); free of
/// cancellation for xi near 0, where the plain difference loses digits.
double symbol_ell_delta(double xi, double gamma, const TruncationPolicy& policy = {});

/// h(xi) - h(0), same stabilized form restricted to odd k.
double symbol_h_delta(double xi, double gamma, const TruncationPolicy& policy = {});

/// |LHS - RHS| of the Poisson summation identity
///   sum_n exp(-alpha (z+n)^2) = sqrt(pi/alpha) sum_n exp(-pi^2 n^2/alpha + 2 i pi n z),
/// both sides truncated per policy.
double poisson_residual(double alpha, cplx z, const TruncationPolicy& policy = {});

/// Closed form sqrt(pi/a) exp(b^2/(4a)) of the Gaussian integral
/// int exp(-a t^2 + b t) dt, a > 0.
double gaussian_integral(double a, double b);

}  // namespace lll::specfun

#endif
