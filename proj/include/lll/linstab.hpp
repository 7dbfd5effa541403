#ifndef LLL_LINSTAB_HPP
#define LLL_LINSTAB_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lll/fock.hpp"

namespace lll::linstab {

using fock::CoeffState;

/// The 2x2 Fourier-side linearization around a lattice stationary state,
///   A(xi) = [[a(xi), b(xi)], [-b(xi), -a(xi)]],
/// with mu(xi) = sqrt(a^2 - b^2) (principal branch, so Im mu >= 0 when the
/// argument is negative, as in the rectangular case). a - b is evaluated in
/// a factorized cancellation-free form, which keeps mu accurate through its
/// fourth-order vanishing at xi = 0.
struct SymbolTable {
    enum class Kind { rect, hexa };
    Kind kind = Kind::hexa;
    double gamma = 0.0;
    double lambda = 0.0;  // stationary frequency entering a's definition
    TruncationPolicy policy;

    double a(double xi) const;
    double b(double xi) const;
    double a_minus_b(double xi) const;  // stable near the zeros of mu
    double a_plus_b(double xi) const;
    double det(double xi) const;  // b^2 - a^2
    cplx mu(double xi) const;
    double mu_real(double xi) const;  // hexa branch, clamped at >= 0

    /// xi-derivative of order d in 0..4 of a and b (term-wise series).
    double a_deriv(double xi, int d) const;
    double b_deriv(double xi, int d) const;
    /// mu, mu', mu'', mu''' at an interior point (requires mu > 0 there).
    std::array<double, 4> mu_jet(double xi) const;

    /// Uniform samples xi_m = m / M, m = 0..M-1.
    std::vector<double> grid(int M) const;
};

SymbolTable build_symbol(SymbolTable::Kind kind, double gamma,
                         const TruncationPolicy& policy = {});

/// Linearized state on the Fourier grid: f(xi_m), g(xi_m) with the reality
/// constraint g(xi) = conj(f(-xi mod 1)).
struct FourierPair {
    int M = 0;
    std::vector<cplx> f, g;

    double xi(int m) const { return double(m) / M; }
    double reality_defect() const;
    void check_reality(double tol = 1e-9) const;

    static FourierPair from_state(const CoeffState& state, int M);
    static FourierPair from_samples(std::vector<cplx> f, std::vector<cplx> g);

    double l2_f() const;    // ||f||_{L^2([0,1])} by the grid sum
    double l2_pair() const; // sqrt(||f||^2 + ||g||^2)
};

/// Coefficients c_n = int_0^1 e^{2 i pi n xi} f(xi) dxi for |n| <= band,
/// computed by FFT on the grid (exact for band-limited f).
std::vector<cplx> pair_coefficients(const FourierPair& pair, int band);
cplx pair_coefficient(const std::vector<cplx>& coeffs, int band, int n);

struct StabilityReport {
    SymbolTable::Kind kind;
    double gamma;
    double det_min = 0.0, det_max = 0.0;
    std::vector<std::pair<double, double>> sign_change_intervals;
    double max_growth_rate = 0.0;  // sup_xi Re(-i mu)
    std::string verdict;           // "stable" | "unstable"
};

/// Classifies the lattice by the sign of det A on the open grid: positive
/// determinant anywhere means imaginary eigenvalues of A and exponential
/// growth of e^{-itA}.
StabilityReport det_scan(const SymbolTable& sym, int grid_size = 4096);

/// Bisection on gamma of "det A_rect takes negative values on (0,1)";
/// the returned transition sits near 2.51. Throws NoTransition when the
/// predicate is constant over the range.
double gamma_threshold_scan(double gamma_lo, double gamma_hi, int grid_size = 2048,
                            double tol = 1e-4);

struct Mat2 {
    cplx m11, m12, m21, m22;
    std::pair<cplx, cplx> apply(cplx x, cplx y) const {
        return {m11 * x + m12 * y, m21 * x + m22 * y};
    }
    cplx det() const { return m11 * m22 - m12 * m21; }
};

/// Closed-form propagator e^{-itA(xi)} =
///   [[cos(t mu) - i a sinc, -i b sinc], [i b sinc, cos(t mu) + i a sinc]],
/// sinc = sin(t mu)/mu evaluated as t * sinc(t mu) with a series crossover
/// below |t mu| = 1e-4, so mu -> 0 is regular.
Mat2 propagator(const SymbolTable& sym, double t, double xi);
Mat2 propagator_entries(double a, double b, cplx mu, double t);

/// sin(x)/x with the small-argument series; complex-safe.
cplx sinc(cplx x);

/// Pointwise application of the propagator at every grid xi; the output
/// satisfies the reality invariant again. Throws RealityViolated when the
/// input does not.
FourierPair evolve_pair(const FourierPair& pair0, const SymbolTable& sym, double t);

/// The four eigenprojection weights k_1^{+-}, k_2^{+-} at xi.
struct KFunctions {
    double k1p, k1m, k2p, k2m;
};
KFunctions k_functions(const SymbolTable& sym, double xi);

/// Leading constant of mu(xi) ~ C xi^2, built from fourth derivatives at 0:
/// C = sqrt(lambda (a''''(0) - b''''(0)) / 12).
double mu_expansion_constant(const SymbolTable& sym);

/// Interior zeros of mu'' located by bisection from a sign scan; the
/// hexagonal symbol has exactly two, mirror-symmetric about 1/2.
std::vector<double> mu_second_derivative_zeros(const SymbolTable& sym, int scan_points = 512);

/// Trapezoid weighted norms on the interior grid:
///   plus = ||(f+g)/mu^{j+1}||, minus = ||(f-g)/mu^j||.
/// Throws NotAdmissible when |(f+g)|/mu^{j+1} grows faster than xi^{-1/2}
/// toward the endpoint, which would make the norm infinite.
struct WeightedNorms {
    double plus, minus;
};
WeightedNorms weighted_norms(const FourierPair& pair, const SymbolTable& sym, int j);

/// Admissibility residuals r0 = |Re sum c_n|, r1 = |Re sum n c_n|.
struct AdmissibilityResidual {
    double r0, r1;
};
AdmissibilityResidual admissibility_residual(const FourierPair& pair);

struct DecayTable {
    std::vector<double> times, sup_norms, slope_so_far;
    double fitted_slope = 0.0;  // log-log fit over the last decade
};

/// Evolves admissible data, synthesizes v(t, .) on the strip and records the
/// sup norm; the fitted slope tracks the t^{-1/3} dispersive decay.
DecayTable linf_decay_experiment(const CoeffState& state0, const std::vector<double>& times,
                                 const SymbolTable& sym, int grid_M = 16384);

struct GrowthTable {
    std::vector<double> times, norms, bound_ratios;  // ratio = ||U||/((1+t)||U0||)
    double fitted_exponent = 0.0;
    double max_bound_ratio = 0.0;
    double initial_norm = 0.0;
};

/// Dyadic-indicator data f0 = sum_{k>=k0} 2^{k/2} k^{-theta} 1_{[2^{-k-1},2^{-k}]},
/// symmetrized about 1/2, with g0 = f0; levels finer than the grid are
/// dropped. Tracks ||U(t)|| against the C(1+t) bound.
GrowthTable growth_experiment(double theta, int k0, double t_max, const SymbolTable& sym,
                              int grid_M = 16384, int n_times = 25);

/// Same driver for arbitrary initial data (used to contrast admissible data).
GrowthTable growth_driver(const FourierPair& pair0, double t_max, const SymbolTable& sym,
                          int n_times = 25);

struct RateMatch {
    double predicted;  // sup_xi sqrt(D) over the positive-determinant set
    double measured;   // fitted exponential rate of ||f(t)|| with f0 = 1
};
RateMatch rect_instability_rate(const SymbolTable& sym, double t_max = 60.0,
                                int grid_M = 4096);

struct MomentConstants {
    double lambda, L, L2, L3;
};
MomentConstants moment_constants(const SymbolTable& sym);

/// Traces K_j(t) = sum n^j c_n(t) = R_j(t) + i I_j(t), j = 0..4, along the
/// linearized evolution of `state0`.
struct MomentTable {
    std::vector<double> times;
    std::array<std::vector<double>, 5> R, I;
    MomentConstants constants;
};
MomentTable moment_trace(const CoeffState& state0, const std::vector<double>& times,
                         const SymbolTable& sym, int grid_M = 4096, int band = 64);

/// EXPERIMENTAL. Exploratory scan of general tau1 lattices (tau = tau1 + i
/// pi/gamma^2): the quadruple overlaps pick up the phase e^{2 pi i tau1 d1 d3},
/// the linearization keeps its convolution structure but the 2x2 symbol goes
/// complex, and this routine reports the largest eigenvalue growth rate over
/// the frequency grid. No correctness claim beyond the two reference points
/// tau1 = 0 (rectangular) and tau1 = -1/2 at the hexagonal gamma; excluded
/// from the acceptance suite.
struct GeneralTauPoint {
    double tau1;
    double max_growth;  // sup_xi max(Im eigenvalue, 0)
};
std::vector<GeneralTauPoint> general_tau_scan(double gamma,
                                              const std::vector<double>& tau1_values,
                                              int xi_grid = 256, int reach = 20);

}  // namespace lll::linstab

#endif
