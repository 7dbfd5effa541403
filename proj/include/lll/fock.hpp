#ifndef LLL_FOCK_HPP
#define LLL_FOCK_HPP

#include <functional>
#include <string>
#include <vector>

#include "lll/common.hpp"
#include "lll/lattice.hpp"

namespace lll::fock {

using lattice::field;
using lattice::LatticeParams;

/// Which Hilbert basis of L^2(S_gamma) convention is in force. The rect basis
/// is psi_k = R_{i k pi/gamma} psi_0 with real weight exp(-pi^2 k^2/gamma^2);
/// the hexa basis is psi_k = R_{k tau gamma} psi_0 carrying the extra phase
/// exp(i pi tau k^2) (kept exactly complex, never reduced mod 2 pi).
struct BasisConvention {
    enum class Tag { rect, hexa };
    Tag tag = Tag::rect;
    LatticeParams params = LatticeParams::rectangular(2.0);

    static BasisConvention rect(double gamma);
    static BasisConvention hexa();
    double gamma() const { return params.gamma; }
    std::string name() const { return tag == Tag::rect ? "rect" : "hexa"; }
};

/// Finite-window complex coefficient state (c_k), k in [kmin, kmax]; the
/// coefficients outside the window are exactly zero by convention.
struct CoeffState {
    int kmin = 0;
    std::vector<cplx> values;
    BasisConvention convention;

    int kmax() const { return kmin + int(values.size()) - 1; }
    int size() const { return int(values.size()); }
    bool in_window(int k) const { return k >= kmin && k <= kmax(); }
    cplx at(int k) const { return in_window(k) ? values[k - kmin] : cplx(0.0); }
    cplx& ref(int k) { return values[k - kmin]; }
    double l2_norm() const;

    static CoeffState zeros(int kmin, int kmax, BasisConvention conv);
    static CoeffState unit(int k, int kmin, int kmax, BasisConvention conv, cplx amp = 1.0);
};

/// JSON serialization {convention, gamma, kmin, values: [[re, im], ...]};
/// doubles round-trip bit exactly.
std::string to_json(const CoeffState& s);
CoeffState coeff_state_from_json(const std::string& text);

/// Strip quadrature: trapezoid in x over one period [-gamma/2, gamma/2) and a
/// uniform y grid wide enough for every Gaussian bump the k-window can
/// produce (heights -k pi/gamma, effective support ~ +-7). The uniform rule
/// integrates shifted Gaussians to spectral accuracy.
struct StripQuadrature {
    double gamma = 2.0;
    int nx = 128;
    double y_lo = -9.0, y_hi = 9.0;
    double dy = 0.25;

    static StripQuadrature for_window(double gamma, int kmin, int kmax, double pad = 7.0,
                                      double dy = 0.25, int nx = 128);

    template <typename F>
    auto integrate(F&& f) const {
        using R = decltype(f(cplx{}));
        const int ny = int(std::ceil((y_hi - y_lo) / dy)) + 1;
        const double hx = gamma / nx;
        R acc{};
        for (int j = 0; j < ny; ++j) {
            const double y = y_lo + j * dy;
            const double wy = (j == 0 || j == ny - 1) ? 0.5 * dy : dy;
            R row{};
            for (int i = 0; i < nx; ++i) {
                const double x = -0.5 * gamma + (i + 0.5) * hx;
                row += f(cplx(x, y));
            }
            acc += row * wy;
        }
        return acc * hx;
    }

    std::vector<cplx> nodes() const;
};

/// Basis function psi_k(z) = (2/(pi gamma^2))^{1/4}
///   exp(2 i k pi z/gamma + phase(k) + z^2/2 - |z|^2/2),
/// phase(k) = -pi^2 k^2/gamma^2 (rect) or i pi tau k^2 (hexa).
cplx psi(int k, cplx z, const BasisConvention& conv);

/// Pointwise sum of the windowed expansion sum_k c_k psi_k(z).
cplx synthesize(const CoeffState& state, cplx z);
field synthesize_field(CoeffState state);

/// Coefficients <u, psi_k> for k in [kmin, kmax] by strip quadrature. Throws
/// NotPeriodic when R_gamma u != u beyond tol at the probe points.
CoeffState analyze(const field& u, int kmin, int kmax, const BasisConvention& conv,
                   const StripQuadrature& quad, double periodicity_tol = 1e-6);
CoeffState analyze(const field& u, int kmin, int kmax, const BasisConvention& conv);

/// Projector kernel on the strip (Lemma-form):
///   K(z,w) = sqrt(2/(pi gamma^2)) e^{-pi^2/(2 gamma^2)}
///            e^{z^2/2 - |z|^2/2 + conj(w)^2/2 - |w|^2/2 - i pi (z - conj(w))/gamma}
///            theta_{2 i pi/gamma^2}((z - conj(w) - i pi/gamma + gamma/2)/gamma).
cplx strip_kernel(cplx z, cplx w, double gamma, const TruncationPolicy& policy = {});

/// Exact quadruple-product overlap A_{k1,k2,k3} =
///   (1/(gamma sqrt(pi))) exp(-pi^2((k2-k1)^2 + (k2-k3)^2)/gamma^2),
/// times (-1)^{(k2-k1)(k2-k3)} in the hexa convention.
double interaction_coeff(int k1, int k2, int k3, double gamma, const BasisConvention& conv);
double interaction_coeff(int k1, int k2, int k3, const BasisConvention& conv);

/// Weighted norm ||<z>^alpha u||_{L^p(S_gamma)} by quadrature; p may be
/// infinity (sup over quadrature nodes).
double strip_norm(const field& u, double p, double alpha, const StripQuadrature& quad);

/// For p = 2, alpha = 0 on a coefficient state this is Parseval's l^2 norm.
double strip_norm(const CoeffState& state, double p = 2.0, double alpha = 0.0);

/// Momentum operator Gamma_1 in coefficients: values[k] *= 2 pi k / gamma.
CoeffState gamma1_apply(const CoeffState& state);

}  // namespace lll::fock

#endif
