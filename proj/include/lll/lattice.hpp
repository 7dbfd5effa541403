#ifndef LLL_LATTICE_HPP
#define LLL_LATTICE_HPP

#include <functional>
#include <vector>

#include "lll/common.hpp"

namespace lll::lattice {

/// A pointwise complex field on C.
using field = std::function<cplx(cplx)>;

/// Lattice gamma (Z + tau Z) with the quantization constraint
/// gamma^2 Im(tau) = pi N; N is the flux number (zeros per fundamental cell).
struct LatticeParams {
    double gamma;
    cplx tau;
    int N = 1;

    static LatticeParams rectangular(double gamma);  // tau = i pi / gamma^2, N = 1
    static LatticeParams hexagonal();                // tau = exp(2 i pi/3), gamma^2 = 2 pi / sqrt(3)

    void validate() const;
    double cell_area() const { return gamma * gamma * tau.imag(); }
    /// Corner-anchored cell point gamma (r1 + r2 tau).
    cplx cell_point(double r1, double r2) const { return gamma * (r1 + r2 * tau); }
    /// Lattice coordinates (r1, r2) of z, so z = gamma (r1 + r2 tau).
    void cell_coords(cplx z, double& r1, double& r2) const;
    /// Representative of z in the base cell [0,1)^2 in lattice coordinates.
    cplx reduce_to_cell(cplx z) const;
    /// Distance from z to the nearest lattice point.
    double lattice_distance(cplx z) const;
};

/// Tensor midpoint rule over the fundamental parallelogram. Integrands that
/// are smooth and doubly periodic (|u| of cell states always is) converge
/// spectrally; weights sum to the cell area exactly.
struct CellQuadrature {
    int n1 = 256, n2 = 256;

    template <typename F>
    auto integrate(const LatticeParams& p, F&& f) const {
        using R = decltype(f(cplx{}));
        R acc{};
        const double w = p.cell_area() / (double(n1) * double(n2));
        for (int i = 0; i < n1; ++i) {
            const double r1 = (i + 0.5) / n1;
            for (int j = 0; j < n2; ++j) {
                const double r2 = (j + 0.5) / n2;
                acc += f(p.cell_point(r1, r2));
            }
        }
        return acc * w;
    }
};

/// N prescribed zero representatives together with the integers (k, l) of the
/// zero-sum constraint sum z_j = (gamma/2)(tau - 1) N - k tau gamma + l gamma.
struct ZeroSet {
    std::vector<cplx> zeros;
    int k = 0, l = 0;

    /// |sum z_j - (gamma/2)(tau-1) N + k tau gamma - l gamma|
    double constraint_residual(const LatticeParams& p) const;
};

/// Magnetic translation R_alpha u(z) = exp((alpha conj(z) - conj(alpha) z)/2) u(z + alpha).
field magnetic_translate(cplx alpha, field u);
cplx magnetic_translate_at(cplx alpha, const field& u, cplx z);

/// The generator Phi_k of E_{tau,gamma,k}: R_{k gamma/N} Phi_0, built from the
/// theta function with zero at z_k = (gamma/2)(tau/N - 1) - k gamma/N.
field phi_k(const LatticeParams& params, int k, const TruncationPolicy& policy = {});

/// Position of the single zero of phi_k in the cell of L_{tau/N, gamma}.
cplx phi_zero(const LatticeParams& params, int k);

/// Multiplicative-form state lambda exp(z^2/2 + b z - |z|^2/2) prod theta((z - z_j)/gamma)
/// with b = i pi (-N + 2k)/gamma. Throws ConstraintViolated when the zero-sum
/// invariant fails beyond tol.
field build_doubly_periodic(const LatticeParams& params, const ZeroSet& zeroset, cplx scale,
                            double tol = 1e-8, const TruncationPolicy& policy = {});

/// Zeros of a doubly quasi-periodic u in one fundamental cell, located by a
/// coarse modulus scan seeding Newton on the holomorphic part u(z) e^{|z|^2/2},
/// with multiplicities from winding numbers on small circles. The total is
/// certified against the argument-principle count on the cell boundary.
std::vector<cplx> find_zeros_in_cell(const field& u, const LatticeParams& params,
                                     int grid = 64);

/// Winding number of u e^{|z|^2/2} along the boundary of the cell anchored at
/// `anchor` (in lattice coordinates); equals the number of enclosed zeros.
int boundary_zero_count(const field& u, const LatticeParams& params, double anchor_r1,
                        double anchor_r2, int samples_per_edge = 512);

/// The shift delta = (gamma/(2 pi N)) (beta - alpha tau) such that
/// R_delta v lies in E_{tau,gamma}, measured from the phases alpha, beta of
/// R_gamma v / v and R_{gamma tau} v / v at a probe point. Among the lattice
/// of valid shifts the minimal-modulus representative is returned.
cplx normalize_phase_shift(const field& v, const LatticeParams& params);

/// L^2(K) pairing int_K u conj(v) and the L^p(K) norm by cell quadrature.
cplx cell_inner(const field& u, const field& v, const LatticeParams& params,
                const CellQuadrature& quad = {});
double cell_lp(const field& u, double p, const LatticeParams& params,
               const CellQuadrature& quad = {});

/// Stationary constant lambda_0 = (gamma/sqrt(2 pi)) e^{pi^2/2gamma^2}
/// sum_{j,l} exp(-gamma^2 |j tau/N - l|^2), with closed-form fast paths for
/// the rectangular and hexagonal lattices.
double lambda0(const LatticeParams& params, const TruncationPolicy& policy = {});
double lambda0_general(const LatticeParams& params, const TruncationPolicy& policy = {});

/// Quasi-periodicity defects of u: sup over probe points of
/// |R_gamma u - u| and |R_{gamma tau} u - u| relative to |u|.
double periodicity_defect(const field& u, const LatticeParams& params);

/// Entire-times-Gaussian function P(z) exp(q z + c - |z|^2/2) with polynomial
/// P; closed under magnetic translations and the infinitesimal generators
///   Gamma_1 = i (z - d/dz - conj(z)/2),  Gamma_2 = z + d/dz + conj(z)/2,
/// which act on the holomorphic part f as i(z f - f') and (z f + f').
struct FockFunction {
    std::vector<cplx> poly{1.0};  // coefficients, poly[j] z^j
    cplx q = 0.0;
    cplx c = 0.0;

    cplx operator()(cplx z) const;
    FockFunction translated(cplx alpha) const;  // R_alpha applied analytically
    FockFunction gamma1() const;
    FockFunction gamma2() const;
    FockFunction apply_gamma(cplx alpha) const;  // alpha1 Gamma_1 + alpha2 Gamma_2
    FockFunction scaled(cplx s) const;
    FockFunction plus(const FockFunction& other) const;  // requires equal (q, c)
};

}  // namespace lll::lattice

#endif
