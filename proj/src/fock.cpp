#include "lll/fock.hpp"

#include <cmath>

#include <json.hpp>

#include "lll/specfun.hpp"

namespace lll::fock {

BasisConvention BasisConvention::rect(double gamma) {
    return BasisConvention{Tag::rect, LatticeParams::rectangular(gamma)};
}

BasisConvention BasisConvention::hexa() {
    return BasisConvention{Tag::hexa, LatticeParams::hexagonal()};
}

double CoeffState::l2_norm() const {
    double s = 0.0;
    for (cplx v : values) s += std::norm(v);
    return std::sqrt(s);
}

CoeffState CoeffState::zeros(int kmin, int kmax, BasisConvention conv) {
    if (kmax < kmin) throw std::invalid_argument("CoeffState: empty window");
    CoeffState s;
    s.kmin = kmin;
    s.values.assign(std::size_t(kmax - kmin + 1), 0.0);
    s.convention = conv;
    return s;
}

CoeffState CoeffState::unit(int k, int kmin, int kmax, BasisConvention conv, cplx amp) {
    CoeffState s = zeros(kmin, kmax, conv);
    if (!s.in_window(k)) throw std::invalid_argument("CoeffState::unit: k outside window");
    s.ref(k) = amp;
    return s;
}

std::string to_json(const CoeffState& s) {
    nlohmann::json j;
    j["convention"] = s.convention.name();
    j["gamma"] = s.convention.gamma();
    j["kmin"] = s.kmin;
    auto& vals = j["values"] = nlohmann::json::array();
    for (cplx v : s.values) vals.push_back({v.real(), v.imag()});
    return j.dump();
}

CoeffState coeff_state_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const std::string conv = j.at("convention").get<std::string>();
    BasisConvention bc;
    if (conv == "hexa") {
        bc = BasisConvention::hexa();
        const double g = j.at("gamma").get<double>();
        if (std::abs(g - bc.gamma()) > 1e-12)
            throw std::invalid_argument("hexa CoeffState with non-hexagonal gamma");
    } else if (conv == "rect") {
        bc = BasisConvention::rect(j.at("gamma").get<double>());
    } else {
        throw std::invalid_argument("unknown basis convention: " + conv);
    }
    CoeffState s;
    s.convention = bc;
    s.kmin = j.at("kmin").get<int>();
    for (const auto& v : j.at("values")) s.values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    if (s.values.empty()) throw std::invalid_argument("CoeffState: empty window");
    return s;
}

StripQuadrature StripQuadrature::for_window(double gamma, int kmin, int kmax, double pad,
                                            double dy, int nx) {
    if (!(gamma > 0.0)) throw std::invalid_argument("StripQuadrature: gamma must be > 0");
    if (kmax < kmin) throw std::invalid_argument("StripQuadrature: empty window");
    StripQuadrature q;
    q.gamma = gamma;
    q.nx = nx;
    q.dy = dy;
    // mode k sits at height -k pi / gamma
    q.y_lo = -pi * kmax / gamma - pad;
    q.y_hi = -pi * kmin / gamma + pad;
    return q;
}

std::vector<cplx> StripQuadrature::nodes() const {
    std::vector<cplx> out;
    const int ny = int(std::ceil((y_hi - y_lo) / dy)) + 1;
    const double hx = gamma / nx;
    out.reserve(std::size_t(ny) * nx);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.emplace_back(-0.5 * gamma + (i + 0.5) * hx, y_lo + j * dy);
    return out;
}

cplx psi(int k, cplx z, const BasisConvention& conv) {
    const double gamma = conv.gamma();
    const double norm4 = std::pow(2.0 / (pi * gamma * gamma), 0.25);
    cplx phase;
    if (conv.tag == BasisConvention::Tag::rect) {
        phase = -pi * pi * double(k) * double(k) / (gamma * gamma);
    } else {
        phase = cplx(0.0, pi) * conv.params.tau * double(k) * double(k);
    }
    const cplx expo = cplx(0.0, 2.0 * pi * k / gamma) * z + phase + 0.5 * z * z - 0.5 * std::norm(z);
    return norm4 * std::exp(expo);
}

cplx synthesize(const CoeffState& state, cplx z) {
    cplx acc = 0.0;
    for (int k = state.kmin; k <= state.kmax(); ++k) {
        const cplx c = state.at(k);
        if (c != 0.0) acc += c * psi(k, z, state.convention);
    }
    return acc;
}

field synthesize_field(CoeffState state) {
    return [s = std::move(state)](cplx z) { return synthesize(s, z); };
}

CoeffState analyze(const field& u, int kmin, int kmax, const BasisConvention& conv,
                   const StripQuadrature& quad, double periodicity_tol) {
    const double gamma = conv.gamma();
    // R_gamma u = u must hold before coefficients mean anything
    double scale = 0.0, defect = 0.0;
    for (cplx probe : {cplx(0.31, 0.77), cplx(-0.53, -0.21), cplx(0.11, 1.43)}) {
        const cplx uz = u(probe);
        scale = std::max(scale, std::abs(uz));
        defect = std::max(defect, std::abs(lattice::magnetic_translate_at(gamma, u, probe) - uz));
    }
    if (defect > periodicity_tol * std::max(scale, 1e-300))
        throw NotPeriodic("R_gamma u deviates from u by " + std::to_string(defect));

    CoeffState out = CoeffState::zeros(kmin, kmax, conv);
    std::vector<int> ks;
    for (int k = kmin; k <= kmax; ++k) ks.push_back(k);
    parallel_for(ks.size(), [&](std::size_t idx) {
        const int k = ks[idx];
        out.ref(k) = quad.integrate([&](cplx z) { return u(z) * std::conj(psi(k, z, conv)); });
    });
    return out;
}

CoeffState analyze(const field& u, int kmin, int kmax, const BasisConvention& conv) {
    return analyze(u, kmin, kmax, conv, StripQuadrature::for_window(conv.gamma(), kmin, kmax));
}

cplx strip_kernel(cplx z, cplx w, double gamma, const TruncationPolicy& policy) {
    const cplx wb = std::conj(w);
    const cplx expo = 0.5 * z * z - 0.5 * std::norm(z) + 0.5 * wb * wb - 0.5 * std::norm(w) -
                      cplx(0.0, pi / gamma) * (z - wb);
    const cplx arg = (z - wb - cplx(0.0, pi / gamma) + 0.5 * gamma) / gamma;
    return std::sqrt(2.0 / (pi * gamma * gamma)) * std::exp(-pi * pi / (2.0 * gamma * gamma)) *
           std::exp(expo) * specfun::theta(arg, cplx(0.0, 2.0 * pi / (gamma * gamma)), policy);
}

double interaction_coeff(int k1, int k2, int k3, double gamma, const BasisConvention& conv) {
    const double d21 = k2 - k1, d23 = k2 - k3;
    double a = std::exp(-pi * pi * (d21 * d21 + d23 * d23) / (gamma * gamma)) /
               (gamma * std::sqrt(pi));
    if (conv.tag == BasisConvention::Tag::hexa && ((k2 - k1) % 2 != 0) && ((k2 - k3) % 2 != 0))
        a = -a;
    return a;
}

double interaction_coeff(int k1, int k2, int k3, const BasisConvention& conv) {
    return interaction_coeff(k1, k2, k3, conv.gamma(), conv);
}

double strip_norm(const field& u, double p, double alpha, const StripQuadrature& quad) {
    if (!(p >= 1.0)) throw std::invalid_argument("strip_norm: p must be >= 1");
    auto weighted = [&](cplx z) {
        const double w = alpha == 0.0 ? 1.0 : std::pow(1.0 + std::norm(z), 0.5 * alpha);
        return w * std::abs(u(z));
    };
    if (std::isinf(p)) {
        double sup = 0.0;
        for (cplx z : quad.nodes()) sup = std::max(sup, weighted(z));
        return sup;
    }
    const double integral = quad.integrate([&](cplx z) { return std::pow(weighted(z), p); });
    return std::pow(integral, 1.0 / p);
}

double strip_norm(const CoeffState& state, double p, double alpha) {
    if (p == 2.0 && alpha == 0.0) return state.l2_norm();
    const auto quad =
        StripQuadrature::for_window(state.convention.gamma(), state.kmin, state.kmax());
    return strip_norm(synthesize_field(state), p, alpha, quad);
}

CoeffState gamma1_apply(const CoeffState& state) {
    CoeffState out = state;
    const double gamma = state.convention.gamma();
    for (int k = state.kmin; k <= state.kmax(); ++k) out.ref(k) *= 2.0 * pi * k / gamma;
    return out;
}

}  // namespace lll::fock
