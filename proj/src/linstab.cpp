#include "lll/linstab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lll/specfun.hpp"

namespace lll::linstab {

using specfun::symbol_ell;
using specfun::symbol_ell_delta;
using specfun::symbol_h;
using specfun::symbol_h_delta;

// ---- symbol tables -----------------------------------------------------------

SymbolTable build_symbol(SymbolTable::Kind kind, double gamma, const TruncationPolicy& policy) {
    SymbolTable sym;
    sym.kind = kind;
    sym.policy = policy;
    if (kind == SymbolTable::Kind::rect) {
        if (!(gamma > 0.0)) throw std::invalid_argument("build_symbol: gamma must be > 0");
        sym.gamma = gamma;
        const double CM = std::exp(pi * pi / (2.0 * gamma * gamma)) / std::sqrt(2.0);
        const double l0 = symbol_ell(0.0, gamma, 0, policy);
        sym.lambda = CM * l0 * l0;
    } else {
        const double g = std::sqrt(2.0 * pi / std::sqrt(3.0));
        if (gamma > 0.0 && std::abs(gamma - g) > 1e-12)
            throw std::invalid_argument("build_symbol: hexagonal symbol has fixed gamma");
        sym.gamma = g;
        const double l0 = symbol_ell(0.0, g, 0, policy);
        const double h0 = symbol_h(0.0, g, 0, policy);
        sym.lambda = (l0 * l0 - 2.0 * h0 * h0) / (g * std::sqrt(pi));
    }
    return sym;
}

namespace {
double cm_of(const SymbolTable& s) {
    return std::exp(pi * pi / (2.0 * s.gamma * s.gamma)) / std::sqrt(2.0);
}
}  // namespace

double SymbolTable::a(double xi) const {
    const double l0 = symbol_ell(0.0, gamma, 0, policy);
    const double lx = symbol_ell(xi, gamma, 0, policy);
    if (kind == Kind::rect) return cm_of(*this) * l0 * (2.0 * lx - l0);
    const double h0 = symbol_h(0.0, gamma, 0, policy);
    const double hx = symbol_h(xi, gamma, 0, policy);
    return 2.0 / (gamma * std::sqrt(pi)) * (lx * l0 - 2.0 * hx * h0) - lambda;
}

double SymbolTable::b(double xi) const {
    const double lx = symbol_ell(xi, gamma, 0, policy);
    if (kind == Kind::rect) return cm_of(*this) * lx * lx;
    const double hx = symbol_h(xi, gamma, 0, policy);
    return (lx * lx - 2.0 * hx * hx) / (gamma * std::sqrt(pi));
}

double SymbolTable::a_minus_b(double xi) const {
    const double dl = symbol_ell_delta(xi, gamma, policy);
    if (kind == Kind::rect) return -cm_of(*this) * dl * dl;
    const double dh = symbol_h_delta(xi, gamma, policy);
    return (2.0 * dh * dh - dl * dl) / (gamma * std::sqrt(pi));
}

double SymbolTable::a_plus_b(double xi) const { return a(xi) + b(xi); }

double SymbolTable::det(double xi) const { return -a_minus_b(xi) * a_plus_b(xi); }

cplx SymbolTable::mu(double xi) const {
    return std::sqrt(cplx(a_minus_b(xi) * a_plus_b(xi), 0.0));
}

double SymbolTable::mu_real(double xi) const {
    return std::sqrt(std::max(a_minus_b(xi) * a_plus_b(xi), 0.0));
}

double SymbolTable::a_deriv(double xi, int d) const {
    if (d == 0) return a(xi);
    const double ld = symbol_ell(xi, gamma, d, policy);
    if (kind == Kind::rect) return 2.0 * cm_of(*this) * symbol_ell(0.0, gamma, 0, policy) * ld;
    const double hd = symbol_h(xi, gamma, d, policy);
    return 2.0 / (gamma * std::sqrt(pi)) *
           (ld * symbol_ell(0.0, gamma, 0, policy) - 2.0 * hd * symbol_h(0.0, gamma, 0, policy));
}

double SymbolTable::b_deriv(double xi, int d) const {
    if (d == 0) return b(xi);
    static const double binom[5][5] = {{1, 0, 0, 0, 0},
                                       {1, 1, 0, 0, 0},
                                       {1, 2, 1, 0, 0},
                                       {1, 3, 3, 1, 0},
                                       {1, 4, 6, 4, 1}};
    double l2d = 0.0, h2d = 0.0;
    for (int i = 0; i <= d; ++i) {
        l2d += binom[d][i] * symbol_ell(xi, gamma, i, policy) * symbol_ell(xi, gamma, d - i, policy);
        if (kind == Kind::hexa)
            h2d += binom[d][i] * symbol_h(xi, gamma, i, policy) * symbol_h(xi, gamma, d - i, policy);
    }
    if (kind == Kind::rect) return cm_of(*this) * l2d;
    return (l2d - 2.0 * h2d) / (gamma * std::sqrt(pi));
}

std::array<double, 4> SymbolTable::mu_jet(double xi) const {
    // jets of a-b (stable delta form) and a+b, then of D = (a-b)(a+b)
    const double dl = symbol_ell_delta(xi, gamma, policy);
    const double l1 = symbol_ell(xi, gamma, 1, policy);
    const double l2 = symbol_ell(xi, gamma, 2, policy);
    const double l3 = symbol_ell(xi, gamma, 3, policy);
    double amb[4];
    if (kind == Kind::rect) {
        const double CM = cm_of(*this);
        amb[0] = -CM * dl * dl;
        amb[1] = -CM * 2.0 * dl * l1;
        amb[2] = -CM * (2.0 * l1 * l1 + 2.0 * dl * l2);
        amb[3] = -CM * (6.0 * l1 * l2 + 2.0 * dl * l3);
    } else {
        const double c = 1.0 / (gamma * std::sqrt(pi));
        const double dh = symbol_h_delta(xi, gamma, policy);
        const double h1 = symbol_h(xi, gamma, 1, policy);
        const double h2 = symbol_h(xi, gamma, 2, policy);
        const double h3 = symbol_h(xi, gamma, 3, policy);
        amb[0] = c * (2.0 * dh * dh - dl * dl);
        amb[1] = c * (4.0 * dh * h1 - 2.0 * dl * l1);
        amb[2] = c * (4.0 * h1 * h1 + 4.0 * dh * h2 - 2.0 * l1 * l1 - 2.0 * dl * l2);
        amb[3] = c * (12.0 * h1 * h2 + 4.0 * dh * h3 - 6.0 * l1 * l2 - 2.0 * dl * l3);
    }
    double apb[4];
    for (int d = 0; d < 4; ++d) apb[d] = a_deriv(xi, d) + b_deriv(xi, d);

    double D[4];
    D[0] = amb[0] * apb[0];
    D[1] = amb[1] * apb[0] + amb[0] * apb[1];
    D[2] = amb[2] * apb[0] + 2.0 * amb[1] * apb[1] + amb[0] * apb[2];
    D[3] = amb[3] * apb[0] + 3.0 * amb[2] * apb[1] + 3.0 * amb[1] * apb[2] + amb[0] * apb[3];

    if (!(D[0] > 0.0))
        throw std::domain_error("mu_jet requires an interior point with mu > 0");
    const double m = std::sqrt(D[0]);
    const double m1 = D[1] / (2.0 * m);
    const double m2 = D[2] / (2.0 * m) - D[1] * D[1] / (4.0 * m * m * m);
    const double m3 = D[3] / (2.0 * m) - 3.0 * D[1] * D[2] / (4.0 * m * m * m) +
                      3.0 * D[1] * D[1] * D[1] / (8.0 * std::pow(m, 5.0));
    return {m, m1, m2, m3};
}

std::vector<double> SymbolTable::grid(int M) const {
    std::vector<double> xs(M);
    for (int m = 0; m < M; ++m) xs[m] = double(m) / M;
    return xs;
}

// ---- Fourier pairs -----------------------------------------------------------

double FourierPair::reality_defect() const {
    double worst = 0.0, scale = 0.0;
    for (int m = 0; m < M; ++m) {
        scale = std::max({scale, std::abs(f[m]), std::abs(g[m])});
        const int mm = (M - m) % M;
        worst = std::max(worst, std::abs(g[m] - std::conj(f[mm])));
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

void FourierPair::check_reality(double tol) const {
    const double d = reality_defect();
    if (d > tol)
        throw RealityViolated("g(xi) = conj(f(-xi)) violated by relative defect " +
                              std::to_string(d));
}

FourierPair FourierPair::from_state(const CoeffState& state, int M) {
    FourierPair p;
    p.M = M;
    p.f.assign(M, 0.0);
    p.g.assign(M, 0.0);
    for (int m = 0; m < M; ++m) {
        const double xi = double(m) / M;
        cplx fv = 0.0, gv = 0.0;
        for (int k = state.kmin; k <= state.kmax(); ++k) {
            const cplx e = std::exp(cplx(0.0, -2.0 * pi * k * xi));
            fv += state.at(k) * e;
            gv += std::conj(state.at(k)) * e;
        }
        p.f[m] = fv;
        p.g[m] = gv;
    }
    return p;
}

FourierPair FourierPair::from_samples(std::vector<cplx> f, std::vector<cplx> g) {
    if (f.size() != g.size() || f.empty())
        throw std::invalid_argument("FourierPair: mismatched sample arrays");
    FourierPair p;
    p.M = int(f.size());
    p.f = std::move(f);
    p.g = std::move(g);
    return p;
}

double FourierPair::l2_f() const {
    double s = 0.0;
    for (cplx v : f) s += std::norm(v);
    return std::sqrt(s / M);
}

double FourierPair::l2_pair() const {
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += std::norm(f[m]) + std::norm(g[m]);
    return std::sqrt(s / M);
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// in-place radix-2 FFT, X_k = sum_j x_j exp(sign * 2 pi i j k / n)
void fft(std::vector<cplx>& x, int sign) {
    const std::size_t n = x.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / double(len);
        const cplx wl = std::exp(cplx(0.0, ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

std::vector<cplx> pair_coefficients(const FourierPair& pair, int band) {
    if (band < 0 || 2 * band + 1 > pair.M)
        throw std::invalid_argument("pair_coefficients: band exceeds grid resolution");
    std::vector<cplx> out(std::size_t(2 * band + 1));
    if (is_pow2(pair.M)) {
        std::vector<cplx> work = pair.f;
        fft(work, +1);
        for (int n = -band; n <= band; ++n)
            out[std::size_t(n + band)] = work[std::size_t((n % pair.M + pair.M) % pair.M)] /
                                         double(pair.M);
    } else {
        for (int n = -band; n <= band; ++n) {
            cplx acc = 0.0;
            for (int m = 0; m < pair.M; ++m)
                acc += pair.f[m] * std::exp(cplx(0.0, 2.0 * pi * n * double(m) / pair.M));
            out[std::size_t(n + band)] = acc / double(pair.M);
        }
    }
    return out;
}

cplx pair_coefficient(const std::vector<cplx>& coeffs, int band, int n) {
    if (n < -band || n > band) return 0.0;
    return coeffs[std::size_t(n + band)];
}

// ---- stability scans ---------------------------------------------------------

StabilityReport det_scan(const SymbolTable& sym, int grid_size) {
    if (grid_size < 64) throw std::invalid_argument("det_scan: grid_size must be >= 64");
    StabilityReport rep;
    rep.kind = sym.kind;
    rep.gamma = sym.gamma;
    rep.det_min = 1e300;
    rep.det_max = -1e300;

    double prev = 0.0;
    double prev_xi = 0.0;
    bool have_prev = false;
    for (int m = 1; m < grid_size; ++m) {
        const double xi = double(m) / grid_size;
        const double d = sym.det(xi);
        rep.det_min = std::min(rep.det_min, d);
        rep.det_max = std::max(rep.det_max, d);
        if (have_prev && ((prev < 0.0) != (d < 0.0)))
            rep.sign_change_intervals.emplace_back(prev_xi, xi);
        prev = d;
        prev_xi = xi;
        have_prev = true;
    }
    rep.max_growth_rate = rep.det_max > 0.0 ? std::sqrt(rep.det_max) : 0.0;
    rep.verdict = rep.det_max > 1e-12 ? "unstable" : "stable";
    return rep;
}

double gamma_threshold_scan(double gamma_lo, double gamma_hi, int grid_size, double tol) {
    auto has_negative = [&](double gamma) {
        const SymbolTable sym = build_symbol(SymbolTable::Kind::rect, gamma);
        for (int m = 1; m < grid_size; ++m)
            if (sym.det(double(m) / grid_size) < -1e-14) return true;
        return false;
    };
    bool lo_neg = has_negative(gamma_lo);
    bool hi_neg = has_negative(gamma_hi);
    if (lo_neg == hi_neg)
        throw NoTransition("determinant sign pattern does not change over [" +
                           std::to_string(gamma_lo) + ", " + std::to_string(gamma_hi) + "]");
    double lo = gamma_lo, hi = gamma_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (has_negative(mid) == lo_neg)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---- propagator --------------------------------------------------------------

cplx sinc(cplx x) {
    if (std::abs(x) < 1e-4) {
        const cplx x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

Mat2 propagator_entries(double a, double b, cplx mu, double t) {
    const cplx tmu = t * mu;
    const cplx c = std::cos(tmu);
    const cplx s = t * sinc(tmu);  // sin(t mu)/mu, regular as mu -> 0
    const cplx ia = cplx(0.0, 1.0) * a * s;
    const cplx ib = cplx(0.0, 1.0) * b * s;
    return Mat2{c - ia, -ib, ib, c + ia};
}

Mat2 propagator(const SymbolTable& sym, double t, double xi) {
    return propagator_entries(sym.a(xi), sym.b(xi), sym.mu(xi), t);
}

FourierPair evolve_pair(const FourierPair& pair0, const SymbolTable& sym, double t) {
    pair0.check_reality();
    FourierPair out;
    out.M = pair0.M;
    out.f.assign(pair0.M, 0.0);
    out.g.assign(pair0.M, 0.0);
    std::vector<double> as(pair0.M), bs(pair0.M);
    std::vector<cplx> mus(pair0.M);
    for (int m = 0; m < pair0.M; ++m) {
        const double xi = pair0.xi(m);
        as[m] = sym.a(xi);
        bs[m] = sym.b(xi);
        mus[m] = sym.mu(xi);
    }
    parallel_for(std::size_t(pair0.M), [&](std::size_t m) {
        const Mat2 E = propagator_entries(as[m], bs[m], mus[m], t);
        const auto [fn, gn] = E.apply(pair0.f[m], pair0.g[m]);
        out.f[m] = fn;
        out.g[m] = gn;
    });
    return out;
}

KFunctions k_functions(const SymbolTable& sym, double xi) {
    const double m = sym.mu_real(xi);
    if (!(m > 0.0)) throw std::domain_error("k_functions: mu vanishes here");
    const double a = sym.a(xi), b = sym.b(xi);
    return KFunctions{(m - a) / (2.0 * m), (m + a) / (2.0 * m), -b / (2.0 * m), b / (2.0 * m)};
}

double mu_expansion_constant(const SymbolTable& sym) {
    if (sym.kind != SymbolTable::Kind::hexa)
        throw std::invalid_argument("mu_expansion_constant: hexagonal symbol required");
    const double a4 = sym.a_deriv(0.0, 4);
    const double b4 = sym.b_deriv(0.0, 4);
    return std::sqrt(sym.lambda * (a4 - b4) / 12.0);
}

std::vector<double> mu_second_derivative_zeros(const SymbolTable& sym, int scan_points) {
    if (sym.kind != SymbolTable::Kind::hexa)
        throw std::invalid_argument("mu_second_derivative_zeros: hexagonal symbol required");
    auto mu2 = [&](double xi) { return sym.mu_jet(xi)[2]; };
    const double lo = 1.0 / scan_points, hi = 1.0 - 1.0 / scan_points;
    std::vector<double> zeros;
    double prev_xi = lo, prev = mu2(lo);
    for (int i = 1; i <= scan_points - 2; ++i) {
        const double xi = lo + (hi - lo) * double(i) / (scan_points - 2);
        const double v = mu2(xi);
        if ((prev < 0.0) != (v < 0.0)) {
            double a = prev_xi, b = xi, fa = prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = mu2(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            zeros.push_back(0.5 * (a + b));
        }
        prev = v;
        prev_xi = xi;
    }
    return zeros;
}

// ---- weighted norms and admissibility -----------------------------------------

WeightedNorms weighted_norms(const FourierPair& pair, const SymbolTable& sym, int j) {
    if (j < 0) throw std::invalid_argument("weighted_norms: j must be >= 0");
    const int M = pair.M;
    std::vector<double> mu(M);
    for (int m = 1; m < M; ++m) mu[m] = sym.mu_real(pair.xi(m));

    // admissibility: |(f+g)| / mu^{j+1} must grow slower than xi^{-1/2}
    double scale = 0.0;
    for (int m = 0; m < M; ++m) scale = std::max({scale, std::abs(pair.f[m]), std::abs(pair.g[m])});
    const int probes = std::min(12, M / 8);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double head = 0.0;
    int n = 0;
    for (int m = 1; m <= probes; ++m) {
        const double s = std::abs(pair.f[m] + pair.g[m]) / std::pow(mu[m], j + 1);
        if (s <= 0.0) continue;
        head = std::max(head, s * std::sqrt(pair.xi(m)));
        const double lx = std::log(pair.xi(m)), ly = std::log(s);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n >= 3 && head > 1e-10 * scale) {
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope <= -0.5)
            throw NotAdmissible("|(f+g)/mu^{j+1}| grows like xi^" + std::to_string(slope) +
                                " toward xi=0");
    }

    double plus = 0.0, minus = 0.0;
    for (int m = 1; m < M; ++m) {
        plus += std::norm(pair.f[m] + pair.g[m]) / std::pow(mu[m], 2 * (j + 1));
        minus += std::norm(pair.f[m] - pair.g[m]) / std::pow(mu[m], 2 * j);
    }
    return WeightedNorms{std::sqrt(plus / M), std::sqrt(minus / M)};
}

AdmissibilityResidual admissibility_residual(const FourierPair& pair) {
    // sum c_n = f(0) exactly; sum n c_n via the spectral coefficients
    const int band = std::min(pair.M / 2 - 1, 4096);
    const auto coeffs = pair_coefficients(pair, band);
    cplx s0 = pair.f[0], s1 = 0.0;
    for (int n = -band; n <= band; ++n) s1 += double(n) * pair_coefficient(coeffs, band, n);
    return AdmissibilityResidual{std::abs(s0.real()), std::abs(s1.real())};
}

// ---- experiments ---------------------------------------------------------------

namespace {

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t i0,
                 std::size_t i1) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = double(i1 - i0);
    for (std::size_t i = i0; i < i1; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * double(i) / (n - 1));
    return out;
}

// sup over the strip of |sum_n c_n psi_n| for the hexagonal basis; modes sit
// at heights -n pi/gamma with Gaussian profiles exp(-(y + n pi/gamma)^2).
double strip_sup_norm(const std::vector<cplx>& coeffs, int band, double gamma, double tau1) {
    const double C = std::pow(2.0 / (pi * gamma * gamma), 0.25);
    double cmax = 0.0;
    for (const cplx& c : coeffs) cmax = std::max(cmax, std::abs(c));
    if (cmax == 0.0) return 0.0;

    // fold all n-dependent phases into the mode amplitudes
    const int Nx = 32;
    std::vector<cplx> roots(Nx);
    for (int j = 0; j < Nx; ++j) roots[j] = std::exp(cplx(0.0, 2.0 * pi * j / Nx));
    std::vector<cplx> amp(coeffs.size());
    for (int n = -band; n <= band; ++n) {
        const cplx phase =
            std::exp(cplx(0.0, pi * tau1 * double(n) * double(n))) *  // basis phase
            std::exp(cplx(0.0, pi * double(n) * (1.0 / Nx - 1.0)));   // x-offset of the grid
        amp[std::size_t(n + band)] = pair_coefficient(coeffs, band, n) * phase;
    }

    const double hpg = pi / gamma;
    auto val_at = [&](double y, int jx) {
        cplx acc = 0.0;
        const int nlo = std::max(-band, int(std::floor(-(y + 6.5) / hpg)));
        const int nhi = std::min(band, int(std::ceil(-(y - 6.5) / hpg)));
        for (int n = nlo; n <= nhi; ++n) {
            const double dy = y + n * hpg;
            const cplx a = amp[std::size_t(n + band)];
            if (a == 0.0) continue;
            acc += a * std::exp(-dy * dy) * roots[std::size_t((((long long)n * jx) % Nx + Nx) % Nx)];
        }
        return std::abs(acc);
    };
    auto max_over_x = [&](double y) {
        double best = 0.0;
        int bj = 0;
        for (int j = 0; j < Nx; ++j) {
            const double v = val_at(y, j);
            if (v > best) {
                best = v;
                bj = j;
            }
        }
        // parabolic refinement around the discrete maximum (periodic in j)
        const double vm = val_at(y, (bj + Nx - 1) % Nx), vp = val_at(y, (bj + 1) % Nx);
        const double denom = vm - 2.0 * best + vp;
        if (denom < 0.0) {
            const double s = 0.5 * (vm - vp) / denom;
            best = best - 0.25 * (vm - vp) * s;
        }
        return best;
    };

    // envelope upper bound locates the candidate heights
    const double ylo = -band * hpg - 6.0, yhi = band * hpg + 6.0;
    const double coarse = 0.4;
    const int ny = int((yhi - ylo) / coarse) + 1;
    std::vector<double> env(std::size_t(ny), 0.0);
    for (int n = -band; n <= band; ++n) {
        const double an = std::abs(amp[std::size_t(n + band)]);
        if (an < 1e-9 * cmax) continue;
        const double yc = -n * hpg;
        const int j0 = std::max(0, int((yc - 6.0 - ylo) / coarse));
        const int j1 = std::min(ny - 1, int((yc + 6.0 - ylo) / coarse));
        for (int j = j0; j <= j1; ++j) {
            const double dy = ylo + j * coarse + n * hpg;
            env[std::size_t(j)] += an * std::exp(-dy * dy);
        }
    }
    const double env_max = *std::max_element(env.begin(), env.end());

    // first pass: establish a lower bound near the envelope peak, then sweep
    // every height whose envelope could still beat it
    double sup = 0.0;
    const int peak = int(std::max_element(env.begin(), env.end()) - env.begin());
    for (double y = ylo + (peak - 2) * coarse; y <= ylo + (peak + 2) * coarse; y += 0.1)
        sup = std::max(sup, max_over_x(y));
    for (int j = 0; j < ny; ++j) {
        if (env[std::size_t(j)] <= std::max(sup, 0.35 * env_max)) continue;
        for (double y = ylo + (j - 0.5) * coarse; y <= ylo + (j + 0.5) * coarse; y += 0.1)
            sup = std::max(sup, max_over_x(y));
    }
    return C * sup;
}

}  // namespace

DecayTable linf_decay_experiment(const CoeffState& state0, const std::vector<double>& times,
                                 const SymbolTable& sym, int grid_M) {
    if (sym.kind != SymbolTable::Kind::hexa)
        throw std::invalid_argument("linf_decay_experiment: hexagonal symbol required");
    if (state0.convention.tag != fock::BasisConvention::Tag::hexa)
        throw std::invalid_argument("linf_decay_experiment: state must use the hexa basis");
    FourierPair pair0 = FourierPair::from_state(state0, grid_M);

    double amp = 0.0;
    for (cplx c : state0.values) amp += std::abs(c);
    const auto res = admissibility_residual(pair0);
    if (res.r0 > 1e-8 * std::max(amp, 1e-30) || res.r1 > 1e-8 * std::max(amp, 1e-30))
        throw NotAdmissible("Re sum c_n = " + std::to_string(res.r0) +
                            ", Re sum n c_n = " + std::to_string(res.r1));

    const double tau1 = -0.5;  // Re tau of the hexagonal lattice
    DecayTable table;
    for (double t : times) {
        const FourierPair pt = evolve_pair(pair0, sym, t);
        const int band = grid_M / 2 - 1;
        const auto coeffs = pair_coefficients(pt, band);
        const double sup = strip_sup_norm(coeffs, band, sym.gamma, tau1);
        table.times.push_back(t);
        table.sup_norms.push_back(sup);
        // running fit over the trailing decade
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < table.times.size(); ++i) {
            if (table.times[i] >= t / 10.0 && table.sup_norms[i] > 0.0) {
                lx.push_back(std::log(table.times[i]));
                ly.push_back(std::log(table.sup_norms[i]));
            }
        }
        table.slope_so_far.push_back(lx.size() >= 2 ? lsq_slope(lx, ly, 0, lx.size()) : 0.0);
    }
    table.fitted_slope = table.slope_so_far.empty() ? 0.0 : table.slope_so_far.back();
    return table;
}

GrowthTable growth_driver(const FourierPair& pair0, double t_max, const SymbolTable& sym,
                          int n_times) {
    if (!(t_max > 1.0)) throw std::invalid_argument("growth_driver: t_max must exceed 1");
    GrowthTable table;
    table.initial_norm = pair0.l2_pair();
    const auto times = logspace(std::min(std::min(1e2, t_max / 10.0), t_max), t_max, n_times);
    std::vector<double> lx, ly;
    for (double t : times) {
        const FourierPair pt = evolve_pair(pair0, sym, t);
        const double nrm = pt.l2_pair();
        const double ratio = nrm / ((1.0 + t) * table.initial_norm);
        table.times.push_back(t);
        table.norms.push_back(nrm);
        table.bound_ratios.push_back(ratio);
        table.max_bound_ratio = std::max(table.max_bound_ratio, ratio);
        lx.push_back(std::log(t));
        ly.push_back(std::log(nrm));
    }
    table.fitted_exponent = lsq_slope(lx, ly, 0, lx.size());
    return table;
}

GrowthTable growth_experiment(double theta, int k0, double t_max, const SymbolTable& sym,
                              int grid_M, int n_times) {
    if (!(theta > 0.5)) throw std::invalid_argument("growth_experiment: theta must be > 1/2");
    if (k0 < 2) throw std::invalid_argument("growth_experiment: k0 must be >= 2");

    std::vector<cplx> f(std::size_t(grid_M), 0.0);
    // levels finer than two grid cells (2^{-k} < 2/M) are unresolvable and dropped
    const int k_max_level = int(std::floor(std::log2(grid_M / 2.0)));
    for (int m = 0; m < grid_M; ++m) {
        const double xi = double(m) / grid_M;
        for (double s : {xi, 1.0 - xi}) {
            if (s <= 0.0 || s > 0.5) continue;
            const int level = int(std::floor(-std::log2(s)));  // s in (2^{-k-1}, 2^{-k}]
            if (level < k0 || level > k_max_level) continue;
            f[std::size_t(m)] += std::pow(2.0, level / 2.0) * std::pow(double(level), -theta);
        }
    }
    FourierPair pair0 = FourierPair::from_samples(f, f);  // real even data: g0 = f0
    return growth_driver(pair0, t_max, sym, n_times);
}

RateMatch rect_instability_rate(const SymbolTable& sym, double t_max, int grid_M) {
    RateMatch out{0.0, 0.0};
    for (int m = 1; m < grid_M; ++m) {
        const double d = sym.det(double(m) / grid_M);
        if (d > 0.0) out.predicted = std::max(out.predicted, std::sqrt(d));
    }

    FourierPair pair0;
    pair0.M = grid_M;
    pair0.f.assign(grid_M, 1.0);
    pair0.g.assign(grid_M, 1.0);

    // fit log||f(t)|| + (1/4) log t over the second half; the log t term
    // removes the Laplace width correction of the interior maximum
    const int n = 48;
    std::vector<double> ts(n), ys(n);
    for (int i = 0; i < n; ++i) {
        const double t = t_max * (0.5 + 0.5 * double(i) / (n - 1));
        const FourierPair pt = evolve_pair(pair0, sym, t);
        ts[i] = t;
        ys[i] = std::log(pt.l2_f()) + 0.25 * std::log(t);
    }
    out.measured = lsq_slope(ts, ys, 0, ts.size());
    return out;
}

MomentConstants moment_constants(const SymbolTable& sym) {
    using specfun::gauss_sum;
    using specfun::SumParity;
    const double g = sym.gamma;
    const double T0 = gauss_sum(0, g, SumParity::all, sym.policy);
    const double T2 = gauss_sum(2, g, SumParity::all, sym.policy);
    const double T4 = gauss_sum(4, g, SumParity::all, sym.policy);
    const double T0o = gauss_sum(0, g, SumParity::odd, sym.policy);
    const double T2o = gauss_sum(2, g, SumParity::odd, sym.policy);
    const double T4o = gauss_sum(4, g, SumParity::odd, sym.policy);
    const double c = 1.0 / (g * std::sqrt(pi));
    return MomentConstants{sym.lambda, 2.0 * c * (T0 * T2 - 2.0 * T0o * T2o),
                           2.0 * c * (T0 * T4 - 2.0 * T0o * T4o),
                           6.0 * c * (T2 * T2 - 2.0 * T2o * T2o)};
}

std::vector<GeneralTauPoint> general_tau_scan(double gamma,
                                              const std::vector<double>& tau1_values,
                                              int xi_grid, int reach) {
    if (!(gamma > 0.0)) throw std::invalid_argument("general_tau_scan: gamma must be > 0");
    const double c0 = 1.0 / (gamma * std::sqrt(pi));
    const double w = pi * pi / (gamma * gamma);

    std::vector<GeneralTauPoint> out;
    for (double tau1 : tau1_values) {
        // convolution kernels of the linearized operator around the all-ones
        // state; the overlap carries the phase e^{-2 pi i tau1 d1 d3} with
        // d1 = k2-k1, d3 = k2-k3, leaving
        //   L(m) = c0 e^{-w m^2} sum_d e^{-w d^2} e^{2 pi i tau1 d m}
        //   M(n) = c0 sum_d e^{-w (d^2 + (n+d)^2)} e^{2 pi i tau1 d (n+d)}
        std::vector<cplx> L(2 * reach + 1), Mk(2 * reach + 1);
        cplx lambda = 0.0;
        for (int m = -reach; m <= reach; ++m) {
            cplx accL = 0.0, accM = 0.0;
            for (int d = -reach; d <= reach; ++d) {
                accL += std::exp(-w * double(d) * d) *
                        std::exp(cplx(0.0, 2.0 * pi * tau1 * d * m));
                const double gm = std::exp(-w * (double(d) * d + double(d + m) * (d + m)));
                accM += gm * std::exp(cplx(0.0, 2.0 * pi * tau1 * d * (d + m)));
            }
            L[std::size_t(m + reach)] = c0 * std::exp(-w * double(m) * m) * accL;
            Mk[std::size_t(m + reach)] = c0 * accM;
            lambda += L[std::size_t(m + reach)];
        }

        double growth = 0.0;
        for (int i = 1; i < xi_grid; ++i) {
            const double xi = double(i) / xi_grid;
            auto transform = [&](const std::vector<cplx>& ker, double x) {
                cplx acc = 0.0;
                for (int m = -reach; m <= reach; ++m)
                    acc += ker[std::size_t(m + reach)] *
                           std::exp(cplx(0.0, -2.0 * pi * m * x));
                return acc;
            };
            const cplx a11 = 2.0 * transform(L, xi) - lambda;
            const cplx a12 = transform(Mk, xi);
            const cplx a21 = -std::conj(transform(Mk, -xi));
            const cplx a22 = -(2.0 * std::conj(transform(L, -xi)) - lambda);
            const cplx tr = a11 + a22;
            const cplx disc = std::sqrt(tr * tr - 4.0 * (a11 * a22 - a12 * a21));
            for (const cplx nu : {0.5 * (tr + disc), 0.5 * (tr - disc)})
                growth = std::max(growth, nu.imag());
        }
        out.push_back({tau1, growth});
    }
    return out;
}

MomentTable moment_trace(const CoeffState& state0, const std::vector<double>& times,
                         const SymbolTable& sym, int grid_M, int band) {
    MomentTable table;
    table.constants = moment_constants(sym);
    const FourierPair pair0 = FourierPair::from_state(state0, grid_M);
    for (double t : times) {
        const FourierPair pt = evolve_pair(pair0, sym, t);
        const auto coeffs = pair_coefficients(pt, band);
        table.times.push_back(t);
        for (int j = 0; j <= 4; ++j) {
            cplx kj = 0.0;
            for (int nn = -band; nn <= band; ++nn)
                kj += std::pow(double(nn), double(j)) * pair_coefficient(coeffs, band, nn);
            table.R[std::size_t(j)].push_back(kj.real());
            table.I[std::size_t(j)].push_back(kj.imag());
        }
    }
    return table;
}

}  // namespace lll::linstab
