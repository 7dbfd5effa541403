// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Each criterion pins its tolerance in code; every numeric check
// appears next to the quantity it gates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "lll/dynamics.hpp"
#include "lll/fock.hpp"
#include "lll/lattice.hpp"
#include "lll/linstab.hpp"
#include "lll/specfun.hpp"

using namespace lll;
using fock::BasisConvention;
using fock::CoeffState;
using linstab::build_symbol;
using linstab::SymbolTable;

namespace {

int failures = 0;

struct Criterion {
    int id;
    std::string name;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", id,
                    name.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::mt19937 rng_for(const char* tag) {
    std::seed_seq seq(tag, tag + std::strlen(tag));
    return std::mt19937(seq);
}

linstab::Mat2 expm_oracle(double a, double b, double t) {
    linstab::Mat2 A{cplx(0.0, -t) * a, cplx(0.0, -t) * b, cplx(0.0, t) * b, cplx(0.0, t) * a};
    int s = 0;
    while (std::max(std::abs(A.m11) + std::abs(A.m12), std::abs(A.m21) + std::abs(A.m22)) >
           0.5) {
        A = {A.m11 / 2.0, A.m12 / 2.0, A.m21 / 2.0, A.m22 / 2.0};
        ++s;
    }
    auto mul = [](const linstab::Mat2& x, const linstab::Mat2& y) {
        return linstab::Mat2{x.m11 * y.m11 + x.m12 * y.m21, x.m11 * y.m12 + x.m12 * y.m22,
                             x.m21 * y.m11 + x.m22 * y.m21, x.m21 * y.m12 + x.m22 * y.m22};
    };
    linstab::Mat2 E{1.0, 0.0, 0.0, 1.0}, term{1.0, 0.0, 0.0, 1.0};
    for (int k = 1; k <= 30; ++k) {
        term = mul(term, A);
        term = {term.m11 / double(k), term.m12 / double(k), term.m21 / double(k),
                term.m22 / double(k)};
        E = {E.m11 + term.m11, E.m12 + term.m12, E.m21 + term.m21, E.m22 + term.m22};
    }
    for (int i = 0; i < s; ++i) E = mul(E, E);
    return E;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * double(i) / (n - 1));
    return out;
}

void criterion_1_hexa_certificate() {
    Criterion c(1, "hexagonal stability certificate");
    const auto sym = build_symbol(SymbolTable::Kind::hexa, 0.0);
    // closed uniform 4096-point grid on [0,1]; its interior is 4094 points
    int below_margin = 0, negative = 0;
    double det_max = -1e300;
    for (int m = 1; m <= 4094; ++m) {
        const double d = sym.det(double(m) / 4095.0);
        det_max = std::max(det_max, d);
        if (d < -1e-12) ++below_margin;
        if (d < 0.0) ++negative;
    }
    c.note("det < -1e-12 on " + std::to_string(below_margin) + "/4094 interior points");
    c.note("det < 0 on " + std::to_string(negative) + "/4094 (det_max = " + num(det_max) + ")");
    c.note("endpoint law det ~ -2*lambda*C^2*xi^4 leaves min(m,4095-m) <= 3 above the margin");
    c.require(below_margin >= 4094, "stated margin count not reached");
    c.require(negative == 4094, "strict negativity failed somewhere");
}

void criterion_2_square_instability() {
    Criterion c(2, "square-lattice instability and rate match");
    const auto sym = build_symbol(SymbolTable::Kind::rect, std::sqrt(pi));
    bool all_positive = true;
    for (int m = 1; m < 4096; ++m)
        if (!(sym.det(double(m) / 4096.0) > 0.0)) all_positive = false;
    c.require(all_positive, "D(xi) not positive on the whole interior grid");
    const auto match = linstab::rect_instability_rate(sym, 60.0);
    const double rel = std::abs(match.measured - match.predicted) / match.predicted;
    c.note("predicted " + num(match.predicted) + ", measured " + num(match.measured) +
           ", rel err " + num(rel));
    c.require(rel < 0.02, "measured growth rate off by more than 2%");
}

void criterion_3_gamma_threshold() {
    Criterion c(3, "rectangular-family threshold gamma0");
    const double g0 = linstab::gamma_threshold_scan(2.0, 3.0);
    c.note("gamma0 = " + num(g0));
    c.require(std::abs(g0 - 2.51) <= 0.02, "gamma0 outside 2.51 +- 0.02");
}

void criterion_4_mu_expansion() {
    Criterion c(4, "mu expansion at the origin");
    const auto sym = build_symbol(SymbolTable::Kind::hexa, 0.0);
    const double C = linstab::mu_expansion_constant(sym);
    const double ratio = sym.mu_real(1e-3) / 1e-6;
    c.note("C = " + num(C) + ", mu(1e-3)/xi^2 = " + num(ratio));
    c.require(std::abs(ratio - C) <= 1e-4 * C, "quadratic constant mismatch beyond 1e-4");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double xi = 1e-3; xi <= 1e-2 * (1.0 + 1e-12); xi *= std::pow(10.0, 0.1)) {
        const double lx = std::log(xi), ly = std::log(sym.mu_real(xi));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    c.note("log-log slope = " + num(slope));
    c.require(std::abs(slope - 2.0) <= 0.02, "slope outside 2.00 +- 0.02");
}

void criterion_5_dispersive_decay() {
    Criterion c(5, "dispersive sup-norm decay t^{-1/3}");
    const auto sym = build_symbol(SymbolTable::Kind::hexa, 0.0);
    auto state = CoeffState::zeros(-8, 8, BasisConvention::hexa());
    for (int k = -8; k <= 8; ++k)
        state.ref(k) = cplx(0.0, std::exp(-0.5 * double(k) * double(k)));
    const auto table = linstab::linf_decay_experiment(state, logspace(1e2, 1e5, 16), sym, 16384);
    c.note("fitted slope = " + num(table.fitted_slope));
    c.require(std::abs(table.fitted_slope + 1.0 / 3.0) <= 0.05,
              "slope outside -1/3 +- 0.05");
}

void criterion_6_growth_optimality() {
    Criterion c(6, "linear growth optimality (theta = 0.6)");
    const auto sym = build_symbol(SymbolTable::Kind::hexa, 0.0);
    const auto table = linstab::growth_experiment(0.6, 2, 1e6, sym, 16384, 25);
    c.note("fitted exponent = " + num(table.fitted_exponent) +
           ", max ||U||/((1+t)||U0||) = " + num(table.max_bound_ratio));
    c.require(table.fitted_exponent >= 0.8, "growth exponent below 0.8");
    c.require(table.max_bound_ratio < 5.0, "C(1+t) bound violated");
    bool monotone_bound = true;
    for (double r : table.bound_ratios)
        if (!(r <= 5.0)) monotone_bound = false;
    c.require(monotone_bound, "bound ratio exceeded the constant during the sweep");
}

void criterion_7_stationary_constants() {
    Criterion c(7, "stationary constants lambda0");
    const auto hexa = lattice::LatticeParams::hexagonal();
    const auto rect = lattice::LatticeParams::rectangular(std::sqrt(pi));
    const double lh = lattice::lambda0(hexa), lhg = lattice::lambda0_general(hexa);
    const double lr = lattice::lambda0(rect), lrg = lattice::lambda0_general(rect);
    c.note("hexa " + num(lh) + ", rect " + num(lr));
    c.require(std::abs(lh - lhg) <= 1e-12 * lh, "hexa closed form vs general sum");
    c.require(std::abs(lr - lrg) <= 1e-12 * lr, "rect closed form vs general sum");
    const lattice::CellQuadrature quad{256, 256};
    for (const auto& params : {hexa, rect}) {
        const auto phi = lattice::phi_k(params, 0);
        const double m2 = std::pow(lattice::cell_lp(phi, 2.0, params, quad), 2.0);
        const double m4 = std::pow(lattice::cell_lp(phi, 4.0, params, quad), 4.0);
        const double l0 = lattice::lambda0(params);
        c.require(std::abs(m4 / m2 - l0) <= 1e-6 * l0,
                  "quadrature ratio vs lambda0 beyond 1e-6");
    }
}

void criterion_8_basis_and_interaction() {
    Criterion c(8, "basis orthonormality and interaction oracle");
    for (const auto& conv : {BasisConvention::rect(1.9), BasisConvention::hexa()}) {
        const auto quad = fock::StripQuadrature::for_window(conv.gamma(), -8, 8);
        const auto nodes = quad.nodes();
        // tabulate psi_k on the nodes once; all 17x17 pairings are then dots
        std::vector<std::vector<cplx>> tab(17);
        for (int k = -8; k <= 8; ++k) {
            auto& row = tab[std::size_t(k + 8)];
            row.resize(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i)
                row[i] = fock::psi(k, nodes[i], conv);
        }
        const double w = quad.dy * conv.gamma() / quad.nx;
        double worst = 0.0;
        for (int j = -8; j <= 8; ++j)
            for (int k = -8; k <= 8; ++k) {
                cplx ip = 0.0;
                const auto& rj = tab[std::size_t(j + 8)];
                const auto& rk = tab[std::size_t(k + 8)];
                for (std::size_t i = 0; i < nodes.size(); ++i) ip += rj[i] * std::conj(rk[i]);
                ip *= w;
                worst = std::max(worst, std::abs(ip - (j == k ? 1.0 : 0.0)));
            }
        c.note(conv.name() + " orthonormality defect " + num(worst));
        c.require(worst < 1e-10, conv.name() + " orthonormality beyond 1e-10");
    }

    auto rng = rng_for("acceptance-interaction");
    std::uniform_int_distribution<int> idx(-4, 4);
    bool saw_negative = false;
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const bool hexa_case = trial % 2 == 1;
        const auto conv = hexa_case ? BasisConvention::hexa() : BasisConvention::rect(1.9);
        const int k1 = idx(rng), k2 = idx(rng), k3 = idx(rng), k4 = k1 - k2 + k3;
        const int lo = std::min({k1, k2, k3, k4}), hi = std::max({k1, k2, k3, k4});
        const auto quad = fock::StripQuadrature::for_window(conv.gamma(), lo, hi, 8.0, 0.2);
        const cplx ip = quad.integrate([&](cplx z) {
            return fock::psi(k1, z, conv) * std::conj(fock::psi(k2, z, conv)) *
                   fock::psi(k3, z, conv) * std::conj(fock::psi(k4, z, conv));
        });
        const double a = fock::interaction_coeff(k1, k2, k3, conv);
        if (a < 0.0) saw_negative = true;
        worst_rel = std::max(worst_rel, std::abs(ip - a) / std::abs(a));
    }
    c.note("interaction worst rel err " + num(worst_rel) +
           (saw_negative ? " (hexagonal sign exercised)" : ""));
    c.require(worst_rel < 1e-8, "interaction coefficient vs quadrature beyond 1e-8");
    c.require(saw_negative, "no negative hexagonal coefficient sampled");
}

void criterion_9_nonlinear_conservation() {
    Criterion c(9, "nonlinear conservation and stationary closed form");
    const auto conv = BasisConvention::hexa();
    const double g = conv.gamma();
    auto rng = rng_for("acceptance-conservation");
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto s0 = CoeffState::zeros(-10, 10, conv);
    for (int k = -3; k <= 3; ++k) s0.ref(k) = cplx(uni(rng), uni(rng));
    const dynamics::StepControl control{1e-10, 1e-12, 1e-3};
    const auto traj = dynamics::integrate(s0, 10.0, control);
    double wm = 0.0, wh = 0.0, wp = 0.0;
    for (const auto& d : traj.drift) {
        wm = std::max(wm, std::abs(d.M_rel));
        wh = std::max(wh, std::abs(d.H_rel));
        wp = std::max(wp, std::abs(d.P_rel));
    }
    c.note("drift M " + num(wm) + ", H " + num(wh) + ", P " + num(wp));
    c.require(wm < 1e-8 && wh < 1e-8 && wp < 1e-8, "conserved-quantity drift beyond 1e-8");

    const cplx amp(1.1, -0.35);
    const auto stat = dynamics::integrate(CoeffState::unit(0, -4, 4, conv, amp), 10.0, control);
    const cplx expected = amp * std::exp(cplx(0.0, -std::norm(amp) * 10.0 / (g * std::sqrt(pi))));
    const auto fin = dynamics::with_values(CoeffState::unit(0, -4, 4, conv, amp),
                                           stat.final_state());
    double err = std::abs(fin.at(0) - expected);
    for (int k = -4; k <= 4; ++k)
        if (k != 0) err = std::max(err, std::abs(fin.at(k)));
    c.note("stationary closed-form error " + num(err));
    c.require(err < 1e-8, "stationary trajectory deviates beyond 1e-8");
}

void criterion_10_moment_laws() {
    Criterion c(10, "linearized moment laws");
    const auto sym = build_symbol(SymbolTable::Kind::hexa, 0.0);
    auto state = CoeffState::zeros(-6, 6, BasisConvention::hexa());
    state.ref(0) = cplx(0.4, 1.0);
    state.ref(1) = cplx(0.3, -0.2);
    state.ref(-2) = cplx(-0.1, 0.25);
    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(5.0 * i);
    const auto table = linstab::moment_trace(state, times, sym);
    double worst = 0.0;
    for (int j = 0; j <= 3; ++j)
        for (std::size_t i = 0; i < times.size(); ++i)
            worst = std::max(worst,
                             std::abs(table.R[std::size_t(j)][i] - table.R[std::size_t(j)][0]));
    c.note("max |R_j(t) - R_j(0)| for j<=3: " + num(worst));
    c.require(worst < 1e-8, "Re K_j drift beyond 1e-8 for some j <= 3");

    const double h = 5e-4;
    const auto fd = linstab::moment_trace(state, {-h, h}, sym);
    const double rate = (fd.R[4][1] - fd.R[4][0]) / (2.0 * h);
    const double predicted = -fd.constants.L3 * fd.I[0][0];
    c.note("dR4/dt = " + num(rate) + " vs -L3 I0 = " + num(predicted));
    c.require(std::abs(rate - predicted) <= 0.01 * std::abs(predicted),
              "R4 rate off by more than 1%");
}

void criterion_11_propagator_oracle() {
    Criterion c(11, "propagator vs series matrix exponential");
    const auto hexa = build_symbol(SymbolTable::Kind::hexa, 0.0);
    const auto sq = build_symbol(SymbolTable::Kind::rect, std::sqrt(pi));
    const auto wide = build_symbol(SymbolTable::Kind::rect, 2.8);
    auto rng = rng_for("acceptance-propagator");
    std::uniform_real_distribution<double> ut(0.0, 5.0), uxi(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const SymbolTable& sym = (i % 3 == 0) ? hexa : (i % 3 == 1 ? sq : wide);
        double xi = uxi(rng);
        if (i < 6) xi = (i % 2 == 0) ? 0.0 : 1e-7;  // mu -> 0 corner
        const double t = ut(rng);
        const auto E = linstab::propagator(sym, t, xi);
        const auto R = expm_oracle(sym.a(xi), sym.b(xi), t);
        double scale = 1.0;
        for (cplx v : {R.m11, R.m12, R.m21, R.m22}) scale = std::max(scale, std::abs(v));
        const double d = std::max({std::abs(E.m11 - R.m11), std::abs(E.m12 - R.m12),
                                   std::abs(E.m21 - R.m21), std::abs(E.m22 - R.m22)});
        worst = std::max(worst, d / scale);
    }
    c.note("worst relative deviation " + num(worst));
    c.require(worst < 1e-10, "propagator differs from expm beyond 1e-10");
}

void criterion_12_identity_battery() {
    Criterion c(12, "identity battery");
    const auto hexa = lattice::LatticeParams::hexagonal();
    const double g = hexa.gamma;
    const double p1 = specfun::poisson_residual(pi, 0.0);
    const double p2 = specfun::poisson_residual(g * g, 0.5);
    c.require(p1 < 1e-12 && p2 < 1e-12,
              "poisson residual " + num(std::max(p1, p2)) + " beyond 1e-12");

    auto rng = rng_for("acceptance-identity");
    std::uniform_real_distribution<double> uni(0.0, 1.0), uim(-0.3, 0.3);
    const cplx tau(0.0, 1.0);
    double worst_qp = 0.0, worst_odd = 0.0;
    for (int i = 0; i < 25; ++i) {
        const cplx z(uni(rng), uim(rng));
        const cplx lhs = specfun::theta(z + tau, tau);
        const cplx rhs = specfun::theta_quasi_period(z, tau) * specfun::theta(z, tau);
        worst_qp = std::max(worst_qp, std::abs(lhs - rhs));
        const cplx zs(uni(rng), uni(rng));
        worst_odd = std::max(worst_odd, std::abs(specfun::theta(-zs, tau) +
                                                 specfun::theta(zs, tau)));
    }
    c.note("theta quasi-periodicity " + num(worst_qp) + ", oddness " + num(worst_odd));
    c.require(worst_qp < 1e-11 && worst_odd < 1e-11, "theta identities beyond 1e-11");

    // kernel bound: fit the constant on a coarse sample, verify with headroom
    double C = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const cplx z(-g / 2 + g * (i + 0.5) / 20.0, -5.0 + 0.5 * i);
            const cplx w(-g / 2 + g * (j + 0.5) / 20.0, -5.0 + 0.5 * j);
            C = std::max(C, std::abs(fock::strip_kernel(z, w, g)) *
                                std::exp(0.5 * std::pow(z.imag() - w.imag(), 2.0)));
        }
    bool bound_holds = true;
    for (int i = 0; i < 300; ++i) {
        const double yz = -7.5 + 0.05 * i;
        const cplx z(0.17, yz), w(-0.29, 0.53);
        if (std::abs(fock::strip_kernel(z, w, g)) >
            1.05 * C * std::exp(-0.5 * (yz - 0.53) * (yz - 0.53)))
            bound_holds = false;
    }
    c.note("kernel bound constant " + num(C));
    c.require(bound_holds, "Gaussian kernel bound violated on the sample grid");

    // rect determinant factorization identity
    double worst_fact = 0.0;
    for (double gamma : {std::sqrt(pi), 2.2, 2.8}) {
        const auto sym = build_symbol(SymbolTable::Kind::rect, gamma);
        const double CM = std::exp(pi * pi / (2.0 * gamma * gamma)) / std::sqrt(2.0);
        const double l0 = specfun::symbol_ell(0.0, gamma, 0);
        for (int m = 1; m < 512; ++m) {
            const double xi = double(m) / 512.0;
            const double lx = specfun::symbol_ell(xi, gamma, 0);
            const double fact = CM * CM * (lx - l0) * (lx - l0) *
                                (lx + (1.0 + std::sqrt(2.0)) * l0) *
                                (lx - (std::sqrt(2.0) - 1.0) * l0);
            worst_fact = std::max(worst_fact, std::abs(sym.det(xi) - fact) /
                                                  std::max(1.0, std::abs(fact)));
        }
    }
    c.note("D-factorization defect " + num(worst_fact));
    c.require(worst_fact < 1e-12, "determinant factorization beyond 1e-12");
}

}  // namespace

int main() {
    criterion_1_hexa_certificate();
    criterion_2_square_instability();
    criterion_3_gamma_threshold();
    criterion_4_mu_expansion();
    criterion_5_dispersive_decay();
    criterion_6_growth_optimality();
    criterion_7_stationary_constants();
    criterion_8_basis_and_interaction();
    criterion_9_nonlinear_conservation();
    criterion_10_moment_laws();
    criterion_11_propagator_oracle();
    criterion_12_identity_battery();
    if (failures)
        std::printf("%d criterion(s) failed\n", failures);
    else
        std::printf("all criteria passed\n");
    return failures;
}
