#include "lll/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "lll/specfun.hpp"

namespace lll::lattice {

using specfun::theta;

LatticeParams LatticeParams::rectangular(double gamma) {
    LatticeParams p{gamma, cplx(0.0, pi / (gamma * gamma)), 1};
    p.validate();
    return p;
}

LatticeParams LatticeParams::hexagonal() {
    const double gamma = std::sqrt(2.0 * pi / std::sqrt(3.0));
    LatticeParams p{gamma, std::exp(cplx(0.0, 2.0 * pi / 3.0)), 1};
    p.validate();
    return p;
}

void LatticeParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("LatticeParams: gamma must be > 0");
    if (!(tau.imag() > 0.0)) throw std::invalid_argument("LatticeParams: Im(tau) must be > 0");
    if (N < 1) throw std::invalid_argument("LatticeParams: N must be >= 1");
    const double defect = std::abs(gamma * gamma * tau.imag() - pi * N);
    if (defect > 1e-12)
        throw ConstraintViolated("quantization gamma^2 Im(tau) = pi N violated by " +
                                 std::to_string(defect));
}

void LatticeParams::cell_coords(cplx z, double& r1, double& r2) const {
    const cplx w = z / gamma;
    r2 = w.imag() / tau.imag();
    r1 = w.real() - r2 * tau.real();
}

cplx LatticeParams::reduce_to_cell(cplx z) const {
    double r1, r2;
    cell_coords(z, r1, r2);
    r1 -= std::floor(r1);
    r2 -= std::floor(r2);
    return cell_point(r1, r2);
}

double LatticeParams::lattice_distance(cplx z) const {
    double r1, r2;
    cell_coords(z, r1, r2);
    r1 -= std::round(r1);
    r2 -= std::round(r2);
    double best = std::abs(gamma * (r1 + r2 * tau));
    // wrap-around candidates, the parallelogram metric is not axis aligned
    for (int dm = -1; dm <= 1; ++dm)
        for (int dn = -1; dn <= 1; ++dn)
            best = std::min(best, std::abs(gamma * ((r1 + dm) + (r2 + dn) * tau)));
    return best;
}

double ZeroSet::constraint_residual(const LatticeParams& p) const {
    cplx s = 0.0;
    for (cplx z : zeros) s += z;
    const cplx target = 0.5 * p.gamma * (p.tau - 1.0) * double(p.N) -
                        double(k) * p.tau * p.gamma + double(l) * p.gamma;
    return std::abs(s - target);
}

cplx magnetic_translate_at(cplx alpha, const field& u, cplx z) {
    return std::exp(0.5 * (alpha * std::conj(z) - std::conj(alpha) * z)) * u(z + alpha);
}

field magnetic_translate(cplx alpha, field u) {
    return [alpha, u = std::move(u)](cplx z) { return magnetic_translate_at(alpha, u, z); };
}

cplx phi_zero(const LatticeParams& params, int k) {
    return 0.5 * params.gamma * (params.tau / double(params.N) - 1.0) -
           double(k) * params.gamma / double(params.N);
}

field phi_k(const LatticeParams& params, int k, const TruncationPolicy& policy) {
    params.validate();
    const double gamma = params.gamma;
    const cplx tauN = params.tau / double(params.N);
    const cplx zk = phi_zero(params, k);
    const cplx phase = std::exp(cplx(0.0, -k * pi / double(params.N)));
    return [=](cplx z) {
        const cplx expo = 0.5 * z * z - cplx(0.0, pi / gamma) * z - 0.5 * std::norm(z);
        return phase * std::exp(expo) * theta((z - zk) / gamma, tauN, policy);
    };
}

field build_doubly_periodic(const LatticeParams& params, const ZeroSet& zeroset, cplx scale,
                            double tol, const TruncationPolicy& policy) {
    params.validate();
    if (int(zeroset.zeros.size()) != params.N)
        throw ConstraintViolated("zero set size " + std::to_string(zeroset.zeros.size()) +
                                 " does not match N=" + std::to_string(params.N));
    const double res = zeroset.constraint_residual(params);
    if (res > tol)
        throw ConstraintViolated("zero-sum constraint residual " + std::to_string(res));

    const double gamma = params.gamma;
    const cplx b = cplx(0.0, pi * (-params.N + 2 * zeroset.k) / gamma);
    const std::vector<cplx> zeros = zeroset.zeros;
    const cplx tau = params.tau;
    return [=](cplx z) {
        cplx prod = 1.0;
        for (cplx zj : zeros) prod *= theta((z - zj) / gamma, tau, policy);
        return scale * std::exp(0.5 * z * z + b * z - 0.5 * std::norm(z)) * prod;
    };
}

namespace {

// Holomorphic part u(z) e^{|z|^2/2}; zeros and winding numbers of u are those of f.
cplx holo(const field& u, cplx z) { return u(z) * std::exp(0.5 * std::norm(z)); }

double winding(const std::vector<cplx>& samples) {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const cplx a = samples[i];
        const cplx b = samples[(i + 1) % samples.size()];
        total += std::arg(b / a);
    }
    return total / (2.0 * pi);
}

}  // namespace

int boundary_zero_count(const field& u, const LatticeParams& params, double anchor_r1,
                        double anchor_r2, int samples_per_edge) {
    std::vector<cplx> vals;
    vals.reserve(4 * samples_per_edge);
    auto corner = [&](double s, double t) {
        return params.cell_point(anchor_r1 + s, anchor_r2 + t);
    };
    for (int e = 0; e < 4; ++e) {
        for (int i = 0; i < samples_per_edge; ++i) {
            const double s = double(i) / samples_per_edge;
            cplx z;
            switch (e) {
                case 0: z = corner(s, 0.0); break;
                case 1: z = corner(1.0, s); break;
                case 2: z = corner(1.0 - s, 1.0); break;
                default: z = corner(0.0, 1.0 - s); break;
            }
            vals.push_back(holo(u, z));
        }
    }
    const double w = winding(vals);
    const int count = int(std::lround(w));
    if (std::abs(w - count) > 0.25)
        throw ZeroCountMismatch("non-integer boundary winding " + std::to_string(w));
    return count;
}

std::vector<cplx> find_zeros_in_cell(const field& u, const LatticeParams& params, int grid) {
    params.validate();
    if (grid < 8) throw std::invalid_argument("find_zeros_in_cell: grid too coarse");

    // choose a cell anchor on which |u| stays well away from zero on the boundary
    double ar1 = 0.0, ar2 = 0.0;
    {
        const double candidates[] = {0.0, -0.213, 0.147, -0.367, 0.291, 0.483};
        double best = -1.0;
        for (double c1 : candidates) {
            for (double c2 : candidates) {
                double lo = 1e300;
                for (int i = 0; i < 64; ++i) {
                    const double s = (i + 0.5) / 64.0;
                    lo = std::min({lo, std::abs(u(params.cell_point(c1 + s, c2))),
                                   std::abs(u(params.cell_point(c1 + s, c2 + 1.0))),
                                   std::abs(u(params.cell_point(c1, c2 + s))),
                                   std::abs(u(params.cell_point(c1 + 1.0, c2 + s)))});
                }
                if (lo > best) {
                    best = lo;
                    ar1 = c1;
                    ar2 = c2;
                }
            }
            if (best > 1e-3) break;
        }
        if (!(best > 0.0))
            throw ZeroCountMismatch("no cell boundary free of zeros was found");
    }

    const int expected = boundary_zero_count(u, params, ar1, ar2);

    // coarse modulus scan over the anchored cell
    std::vector<double> mod(std::size_t(grid) * grid);
    auto at = [&](int i, int j) -> double {
        return mod[std::size_t(((i % grid) + grid) % grid) * grid + (((j % grid) + grid) % grid)];
    };
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j)
            mod[std::size_t(i) * grid + j] =
                std::abs(u(params.cell_point(ar1 + (i + 0.5) / grid, ar2 + (j + 0.5) / grid)));

    std::vector<cplx> seeds;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double m = at(i, j);
            if (m <= at(i + 1, j) && m <= at(i - 1, j) && m <= at(i, j + 1) && m <= at(i, j - 1))
                seeds.push_back(params.cell_point(ar1 + (i + 0.5) / grid, ar2 + (j + 0.5) / grid));
        }
    }

    // Newton iteration on the holomorphic quotient
    const double scale = params.gamma * (1.0 + std::abs(params.tau));
    std::vector<cplx> roots;
    for (cplx z0 : seeds) {
        cplx z = z0;
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const double h = 1e-7 * (1.0 + std::abs(z));
            const cplx f = holo(u, z);
            const cplx df = (holo(u, z + h) - holo(u, z - h)) / (2.0 * h);
            if (std::abs(df) == 0.0) break;
            const cplx dz = f / df;
            z -= dz;
            if (std::abs(z - z0) > 0.75 * scale) break;  // left the basin
            if (std::abs(dz) < 1e-13 * (1.0 + std::abs(z))) {
                ok = true;
                break;
            }
        }
        if (!ok) continue;
        // map into the anchored cell and deduplicate
        double r1, r2;
        params.cell_coords(z, r1, r2);
        r1 -= ar1;
        r2 -= ar2;
        r1 -= std::floor(r1);
        r2 -= std::floor(r2);
        z = params.cell_point(ar1 + r1, ar2 + r2);
        bool dup = false;
        for (cplx r : roots)
            if (params.lattice_distance(z - r) < 2.5e-3) dup = true;
        if (!dup) roots.push_back(z);
    }

    // multiplicities by winding on small circles
    std::vector<cplx> out;
    int total = 0;
    for (cplx r : roots) {
        std::vector<cplx> circle;
        for (int i = 0; i < 128; ++i)
            circle.push_back(holo(u, r + 1e-3 * std::exp(cplx(0.0, 2.0 * pi * i / 128.0))));
        const int mult = int(std::lround(winding(circle)));
        for (int m = 0; m < mult; ++m) out.push_back(r);
        total += mult;
    }
    if (total != expected)
        throw ZeroCountMismatch("found " + std::to_string(total) + " zeros, boundary count " +
                                std::to_string(expected));
    return out;
}

cplx normalize_phase_shift(const field& v, const LatticeParams& params) {
    params.validate();
    const double gamma = params.gamma;
    const cplx tau = params.tau;

    // typical magnitude, for the probe-at-zero guard
    double scale = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            scale = std::max(scale, std::abs(v(params.cell_point((i + 0.5) / 5.0, (j + 0.5) / 5.0))));
    if (!(scale > 0.0)) throw ProbeAtZero("function vanishes at all probe points");

    cplx probe = 0.0;
    bool found = false;
    for (int di = 0; di <= 2 && !found; ++di) {
        for (int dj = 0; dj <= 2 && !found; ++dj) {
            const cplx p = params.cell_point(0.5 + 0.11 * (di - 1), 0.5 + 0.11 * (dj - 1));
            if (std::abs(v(p)) > 1e-6 * scale) {
                probe = p;
                found = true;
            }
        }
    }
    if (!found) throw ProbeAtZero("all jittered probe points lie too close to a zero");

    const cplx vp = v(probe);
    const double alpha = std::arg(magnetic_translate_at(gamma, v, probe) / vp);
    const double beta = std::arg(magnetic_translate_at(gamma * tau, v, probe) / vp);

    // delta is defined modulo (gamma/N)(Z + tau Z); take the smallest representative
    const cplx delta0 = gamma / (2.0 * pi * params.N) * (beta - alpha * tau);
    cplx best = delta0;
    for (int m = -4; m <= 4; ++m) {
        for (int n = -4; n <= 4; ++n) {
            const cplx cand = delta0 + gamma / double(params.N) * (double(m) - double(n) * tau);
            if (std::abs(cand) < std::abs(best) - 1e-14 ||
                (std::abs(cand) < std::abs(best) + 1e-14 &&
                 (cand.real() < best.real() - 1e-14 ||
                  (std::abs(cand.real() - best.real()) <= 1e-14 && cand.imag() < best.imag()))))
                best = cand;
        }
    }
    return best;
}

cplx cell_inner(const field& u, const field& v, const LatticeParams& params,
                const CellQuadrature& quad) {
    return quad.integrate(params, [&](cplx z) { return u(z) * std::conj(v(z)); });
}

double cell_lp(const field& u, double p, const LatticeParams& params,
               const CellQuadrature& quad) {
    if (!(p >= 1.0)) throw std::invalid_argument("cell_lp: p must be >= 1");
    const double val =
        quad.integrate(params, [&](cplx z) { return std::pow(std::abs(u(z)), p); });
    return std::pow(val, 1.0 / p);
}

double lambda0_general(const LatticeParams& params, const TruncationPolicy& policy) {
    params.validate();
    policy.validate();
    const double g2 = params.gamma * params.gamma;
    const double t1 = params.tau.real() / params.N;
    const double t2 = params.tau.imag() / params.N;

    double S = 0.0;
    for (int j = 0;; ++j) {
        if (j > policy.max_terms) throw TailNotMet("lambda0 row sum tail not met");
        const double rowgauss = std::exp(-g2 * (j * t2) * (j * t2));
        if (j > 0 && 3.0 * rowgauss < policy.eps) break;
        double row = 0.0;
        const double center = j * t1;
        const int l0 = int(std::lround(center));
        for (int d = 0;; ++d) {
            if (d > policy.max_terms) throw TailNotMet("lambda0 column sum tail not met");
            double term = 0.0;
            const double lp = (l0 + d) - center, lm = (l0 - d) - center;
            term += std::exp(-g2 * lp * lp);
            if (d > 0) term += std::exp(-g2 * lm * lm);
            row += term;
            if (d > 0 && term < policy.eps) break;
        }
        S += (j == 0 ? 1.0 : 2.0) * rowgauss * row;  // +-j are symmetric
        if (j == 0) continue;
    }
    return params.gamma / std::sqrt(2.0 * pi) * std::exp(pi * pi / (2.0 * g2)) * S;
}

double lambda0(const LatticeParams& params, const TruncationPolicy& policy) {
    params.validate();
    const double g = params.gamma;
    const double pref = std::exp(pi * pi / (2.0 * g * g)) / std::sqrt(2.0);
    if (params.N == 1 && std::abs(params.tau.real()) < 1e-14) {
        // rectangular: lambda0 = pref * (sum_q e^{-pi^2 q^2/gamma^2})^2
        const double T0 = specfun::gauss_sum(0, g, specfun::SumParity::all, policy);
        return pref * T0 * T0;
    }
    const bool hexa = params.N == 1 &&
                      std::abs(params.tau - std::exp(cplx(0.0, 2.0 * pi / 3.0))) < 1e-12;
    if (hexa) {
        const double J = specfun::gauss_sum(0, g, specfun::SumParity::odd, policy);
        const double I = specfun::gauss_sum(0, g, specfun::SumParity::all, policy) - J;
        return pref * (I * I + 2.0 * I * J - J * J);
    }
    return lambda0_general(params, policy);
}

double periodicity_defect(const field& u, const LatticeParams& params) {
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const cplx z = params.cell_point((i + 0.4) / 4.0, (j + 0.6) / 4.0);
            const cplx uz = u(z);
            scale = std::max(scale, std::abs(uz));
            worst = std::max({worst, std::abs(magnetic_translate_at(params.gamma, u, z) - uz),
                              std::abs(magnetic_translate_at(params.gamma * params.tau, u, z) - uz)});
        }
    }
    return scale > 0.0 ? worst / scale : worst;
}

// ---- FockFunction -----------------------------------------------------------

namespace {

std::vector<cplx> poly_derivative(const std::vector<cplx>& p) {
    if (p.size() <= 1) return {0.0};
    std::vector<cplx> d(p.size() - 1);
    for (std::size_t j = 1; j < p.size(); ++j) d[j - 1] = double(j) * p[j];
    return d;
}

std::vector<cplx> poly_shift(const std::vector<cplx>& p, cplx beta) {
    // coefficients of P(z + beta)
    std::vector<cplx> out(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        cplx binom = 1.0;  // C(i, j) beta^{i-j}, built up from j = i downwards
        cplx bpow = 1.0;
        for (std::size_t j = 0; j <= i; ++j) {
            // C(i, i-j) beta^j term contributes to out[i-j]
            out[i - j] += p[i] * binom * bpow;
            binom *= double(i - j) / double(j + 1);
            bpow *= beta;
        }
    }
    return out;
}

std::vector<cplx> poly_mul_z(const std::vector<cplx>& p) {
    std::vector<cplx> out(p.size() + 1, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) out[j + 1] = p[j];
    return out;
}

std::vector<cplx> poly_axpy(cplx a, const std::vector<cplx>& x, cplx b,
                            const std::vector<cplx>& y) {
    std::vector<cplx> out(std::max(x.size(), y.size()), 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] += a * x[j];
    for (std::size_t j = 0; j < y.size(); ++j) out[j] += b * y[j];
    return out;
}

}  // namespace

cplx FockFunction::operator()(cplx z) const {
    cplx pv = 0.0;
    for (std::size_t j = poly.size(); j-- > 0;) pv = pv * z + poly[j];
    return pv * std::exp(q * z + c - 0.5 * std::norm(z));
}

FockFunction FockFunction::translated(cplx alpha) const {
    FockFunction out;
    out.poly = poly_shift(poly, alpha);
    out.q = q - std::conj(alpha);
    out.c = c + q * alpha - 0.5 * std::norm(alpha);
    return out;
}

FockFunction FockFunction::gamma1() const {
    // Gamma_1 u = i (z f - f') e^{-|z|^2/2} for u = f e^{-|z|^2/2}, f = P e^{qz+c}
    FockFunction out;
    out.q = q;
    out.c = c;
    const auto zP = poly_mul_z(poly);
    const auto dP = poly_derivative(poly);
    // z f - f' = (z P - P' - q P) e^{qz+c}
    auto inner = poly_axpy(1.0, zP, -1.0, dP);
    inner = poly_axpy(1.0, inner, -q, poly);
    out.poly = poly_axpy(cplx(0.0, 1.0), inner, 0.0, {0.0});
    return out;
}

FockFunction FockFunction::gamma2() const {
    FockFunction out;
    out.q = q;
    out.c = c;
    const auto zP = poly_mul_z(poly);
    const auto dP = poly_derivative(poly);
    auto inner = poly_axpy(1.0, zP, 1.0, dP);
    out.poly = poly_axpy(1.0, inner, q, poly);
    return out;
}

FockFunction FockFunction::apply_gamma(cplx alpha) const {
    return gamma1().scaled(alpha.real()).plus(gamma2().scaled(alpha.imag()));
}

FockFunction FockFunction::scaled(cplx s) const {
    FockFunction out = *this;
    for (auto& a : out.poly) a *= s;
    return out;
}

FockFunction FockFunction::plus(const FockFunction& other) const {
    if (std::abs(q - other.q) > 1e-14 || std::abs(c - other.c) > 1e-14)
        throw std::invalid_argument("FockFunction::plus requires matching exponential parts");
    FockFunction out = *this;
    out.poly = poly_axpy(1.0, poly, 1.0, other.poly);
    return out;
}

}  // namespace lll::lattice
