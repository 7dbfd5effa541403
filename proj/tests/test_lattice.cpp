#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "lll/fock.hpp"
#include "lll/lattice.hpp"
#include "lll/specfun.hpp"

using namespace lll;
using namespace lll::lattice;

namespace {

std::mt19937 rng_for(const char* tag) {
    std::seed_seq seq(tag, tag + std::strlen(tag));
    return std::mt19937(seq);
}

cplx random_point(std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> uni(-scale, scale);
    return {uni(rng), uni(rng)};
}

}  // namespace

TEST_CASE("lattice parameter constructors satisfy the quantization") {
    const auto hexa = LatticeParams::hexagonal();
    CHECK(std::abs(hexa.gamma * hexa.gamma - 2.0 * pi / std::sqrt(3.0)) < 1e-14);
    CHECK(std::abs(hexa.gamma * hexa.gamma * hexa.tau.imag() - pi) < 1e-12);
    const auto rect = LatticeParams::rectangular(1.7);
    CHECK(std::abs(rect.gamma * rect.gamma * rect.tau.imag() - pi) < 1e-12);
    CHECK_THROWS_AS((LatticeParams{1.0, cplx(0.0, 1.0), 1}.validate()), ConstraintViolated);
}

TEST_CASE("magnetic translations") {
    auto rng = rng_for("magnetic");
    field u = [](cplx z) { return std::exp(0.3 * z - 0.5 * std::norm(z)) * (z * z + 1.0); };
    SUBCASE("R_0 is the identity") {
        for (int i = 0; i < 5; ++i) {
            const cplx z = random_point(rng);
            CHECK(std::abs(magnetic_translate_at(0.0, u, z) - u(z)) == 0.0);
        }
    }
    SUBCASE("composition picks up the commutation phase") {
        const cplx alpha = 1.0, beta(0.0, 1.0), z(0.2, 0.0);
        const cplx lhs = magnetic_translate_at(alpha, magnetic_translate(beta, u), z);
        const cplx rhs = magnetic_translate_at(beta, magnetic_translate(alpha, u), z);
        const cplx phase = std::exp(std::conj(alpha) * beta - alpha * std::conj(beta));
        CHECK(std::abs(lhs / rhs - phase) < 1e-13);
    }
    SUBCASE("R_alpha inverts to R_{-alpha}") {
        const cplx alpha(0.7, 0.3);
        for (int i = 0; i < 5; ++i) {
            const cplx z = random_point(rng);
            const cplx back = magnetic_translate_at(-alpha, magnetic_translate(alpha, u), z);
            CHECK(std::abs(back - u(z)) < 1e-14);
        }
    }
}

TEST_CASE("Phi_k satisfies both lattice symmetries") {
    auto rng = rng_for("phik");
    for (const auto& params :
         {LatticeParams::hexagonal(), LatticeParams{1.6, cplx(0.0, 2.0 * pi / (1.6 * 1.6)), 2}}) {
        for (int k = 0; k < params.N; ++k) {
            const auto phi = phi_k(params, k);
            const cplx eig = std::exp(cplx(0.0, -2.0 * pi * k / params.N));
            for (int i = 0; i < 10; ++i) {
                const cplx z = random_point(rng, 0.8);
                const cplx uz = phi(z);
                CHECK(std::abs(magnetic_translate_at(params.gamma, phi, z) - uz) <
                      1e-11 * std::max(1.0, std::abs(uz)));
                CHECK(std::abs(magnetic_translate_at(params.gamma * params.tau / double(params.N),
                                                     phi, z) -
                               eig * uz) < 1e-11 * std::max(1.0, std::abs(uz)));
            }
        }
    }
}

TEST_CASE("Phi_0 matches its Hilbert-basis expansion (hexagonal)") {
    const auto params = LatticeParams::hexagonal();
    const auto phi = phi_k(params, 0);
    const cplx z(0.1, 0.2);
    // oracle: the rect-convention basis expansion with phases e^{i pi tau1 n^2}
    const auto conv = fock::BasisConvention::rect(params.gamma);
    cplx sum = 0.0;
    for (int n = -8; n <= 8; ++n)
        sum += std::exp(cplx(0.0, pi * params.tau.real() * n * n)) * fock::psi(n, z, conv);
    sum *= std::exp(cplx(0.0, -pi / 4.0) * params.tau) *
           std::pow(pi * params.gamma * params.gamma / 2.0, 0.25);
    CHECK(std::abs(phi(z) - sum) < 1e-10);
}

TEST_CASE("multiplicative states") {
    const auto params = LatticeParams::hexagonal();
    const cplx z0 = 0.5 * params.gamma * (params.tau - 1.0);
    SUBCASE("N=1 with the canonical zero reduces to Phi_0 up to a constant") {
        const auto u = build_doubly_periodic(params, ZeroSet{{z0}, 0, 0}, 1.0);
        const auto phi = phi_k(params, 0);
        auto rng = rng_for("multiplicative");
        cplx ratio_ref = 0.0;
        for (int i = 0; i < 10; ++i) {
            const cplx z = random_point(rng, 0.7);
            const cplx ratio = u(z) / phi(z);
            if (i == 0)
                ratio_ref = ratio;
            else
                CHECK(std::abs(ratio - ratio_ref) < 1e-10 * std::abs(ratio_ref));
        }
    }
    SUBCASE("periodicity defects stay below 1e-10") {
        const auto u = build_doubly_periodic(params, ZeroSet{{z0}, 0, 0}, 1.0);
        CHECK(periodicity_defect(u, params) < 1e-10);
    }
    SUBCASE("a violated zero sum is rejected") {
        CHECK_THROWS_AS(build_doubly_periodic(params, ZeroSet{{z0 + 0.1}, 0, 0}, 1.0),
                        ConstraintViolated);
    }
    SUBCASE("nonzero (k,l) branch keeps periodicity") {
        const cplx sum_target = 0.5 * params.gamma * (params.tau - 1.0) -
                                1.0 * params.tau * params.gamma + 2.0 * params.gamma;
        const auto u = build_doubly_periodic(params, ZeroSet{{sum_target}, 1, 2}, 0.7);
        CHECK(periodicity_defect(u, params) < 1e-9);
    }
}

TEST_CASE("zero finding in a fundamental cell") {
    SUBCASE("the zero of Phi_0 is its construction point") {
        const auto params = LatticeParams::hexagonal();
        const auto zs = find_zeros_in_cell(phi_k(params, 0), params);
        REQUIRE(zs.size() == 1);
        CHECK(params.lattice_distance(zs[0] - phi_zero(params, 0)) < 1e-8);
    }
    SUBCASE("a double zero is reported with multiplicity two") {
        const double g = 1.6;
        const LatticeParams params{g, cplx(0.0, 2.0 * pi / (g * g)), 2};
        const cplx zd = 0.5 * params.gamma * (params.tau - 1.0);  // z1 = z2, sum constraint holds
        const auto u = build_doubly_periodic(params, ZeroSet{{zd, zd}, 0, 0}, 1.0);
        const auto zs = find_zeros_in_cell(u, params);
        REQUIRE(zs.size() == 2);
        CHECK(params.lattice_distance(zs[0] - zd) < 1e-6);
        CHECK(params.lattice_distance(zs[1] - zd) < 1e-6);
    }
    SUBCASE("prescribed N=2 zeros are recovered") {
        const double g = 1.6;
        const LatticeParams params{g, cplx(0.0, 2.0 * pi / (g * g)), 2};
        const cplx za = 0.31 * params.cell_point(1.0, 0.0) + 0.22 * params.cell_point(0.0, 1.0);
        const cplx target = params.gamma * (params.tau - 1.0);  // k=l=0, N=2
        const cplx zb = target - za;
        const auto u = build_doubly_periodic(params, ZeroSet{{za, zb}, 0, 0}, 1.0);
        auto zs = find_zeros_in_cell(u, params);
        REQUIRE(zs.size() == 2);
        for (const cplx z : zs)
            CHECK(std::min(params.lattice_distance(z - za), params.lattice_distance(z - zb)) <
                  1e-8);
    }
}

TEST_CASE("phase normalization") {
    const auto params = LatticeParams::hexagonal();
    SUBCASE("an element of the space needs no shift") {
        const auto phi = phi_k(params, 0);
        CHECK(std::abs(normalize_phase_shift(phi, params)) < 1e-10);
    }
    SUBCASE("a vanishing function has no usable probe") {
        field zero = [](cplx) { return cplx(0.0); };
        CHECK_THROWS_AS(normalize_phase_shift(zero, params), ProbeAtZero);
    }
    SUBCASE("the ABN function is shifted by -z0 modulo the lattice") {
        field v = [&](cplx z) {
            return std::exp(0.5 * z * z - 0.5 * std::norm(z)) *
                   specfun::theta(z / params.gamma, params.tau);
        };
        const cplx delta = normalize_phase_shift(v, params);
        const cplx z0 = 0.5 * params.gamma * (params.tau - 1.0);
        CHECK(params.lattice_distance(delta - (-z0)) < 1e-8);
        CHECK(periodicity_defect(magnetic_translate(delta, v), params) < 1e-9);
    }
}

TEST_CASE("cell inner products and norms") {
    const CellQuadrature quad{192, 192};
    SUBCASE("weights sum to the cell area") {
        const auto params = LatticeParams::hexagonal();
        const double area = quad.integrate(params, [](cplx) { return 1.0; });
        CHECK(area == doctest::Approx(params.cell_area()).epsilon(1e-13));
    }
    SUBCASE("the Phi family is orthogonal for N=2") {
        const double g = 1.6;
        const LatticeParams params{g, cplx(0.0, 2.0 * pi / (g * g)), 2};
        const auto p0 = phi_k(params, 0), p1 = phi_k(params, 1);
        const cplx ip = cell_inner(p0, p1, params, quad);
        const double n0 = cell_lp(p0, 2.0, params, quad);
        CHECK(std::abs(ip) < 1e-9 * n0 * n0);
    }
    SUBCASE("closed-form L2 and L4 cell norms") {
        for (const auto& params :
             {LatticeParams::hexagonal(), LatticeParams{1.6, cplx(0.0, 2.0 * pi / 2.56), 2}}) {
            const double g = params.gamma;
            const auto phi = phi_k(params, params.N - 1);
            const double m2 = std::pow(cell_lp(phi, 2.0, params, quad), 2.0);
            const double m2_closed =
                g * params.N * std::sqrt(pi / 2.0) * std::exp(pi * pi / (2.0 * g * g));
            CHECK(m2 == doctest::Approx(m2_closed).epsilon(1e-8));

            double S = 0.0;  // sum_{j,l} exp(-gamma^2 |j tau/N - l|^2)
            for (int j = -40; j <= 40; ++j)
                for (int l = -40; l <= 40; ++l)
                    S += std::exp(-g * g *
                                  std::norm(double(j) * params.tau / double(params.N) -
                                            double(l)));
            const double m4 = std::pow(cell_lp(phi, 4.0, params, quad), 4.0);
            const double m4_closed = params.N * g * g / 2.0 * std::exp(pi * pi / (g * g)) * S;
            CHECK(m4 == doctest::Approx(m4_closed).epsilon(1e-8));
        }
    }
}

TEST_CASE("stationary constant lambda0") {
    SUBCASE("rectangular: general sum vs closed form") {
        const auto params = LatticeParams::rectangular(std::sqrt(pi));
        CHECK(lambda0(params) == doctest::Approx(lambda0_general(params)).epsilon(1e-12));
    }
    SUBCASE("hexagonal: general sum vs I/J closed form") {
        const auto params = LatticeParams::hexagonal();
        CHECK(lambda0(params) == doctest::Approx(lambda0_general(params)).epsilon(1e-12));
    }
    SUBCASE("lambda0 equals the quadrature ratio of cell norms") {
        const auto params = LatticeParams::hexagonal();
        const CellQuadrature quad{256, 256};
        const auto phi = phi_k(params, 0);
        const double m2 = std::pow(cell_lp(phi, 2.0, params, quad), 2.0);
        const double m4 = std::pow(cell_lp(phi, 4.0, params, quad), 4.0);
        CHECK(lambda0(params) == doctest::Approx(m4 / m2).epsilon(1e-6));
    }
    SUBCASE("a sheared N=2 lattice goes through the general sum") {
        const double g = 1.6;
        const LatticeParams params{g, cplx(0.3, 2.0 * pi / (g * g)), 2};
        const CellQuadrature quad{192, 192};
        const auto phi = phi_k(params, 1);
        const double m2 = std::pow(cell_lp(phi, 2.0, params, quad), 2.0);
        const double m4 = std::pow(cell_lp(phi, 4.0, params, quad), 4.0);
        CHECK(lambda0(params) == doctest::Approx(lambda0_general(params)).epsilon(1e-15));
        CHECK(lambda0(params) == doctest::Approx(m4 / m2).epsilon(1e-6));
    }
}

TEST_CASE("projector self-adjointness on the cell through the strip kernel") {
    const auto params = LatticeParams::hexagonal();
    const double g = params.gamma;
    const auto phi = phi_k(params, 0);

    // strip realization of Pi: fixed w-grid over one period, wide in y
    const int nx = 48;
    const double ylo = -10.0, yhi = 10.0, dy = 0.25;
    const int ny = int((yhi - ylo) / dy) + 1;
    std::vector<cplx> wnodes;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            wnodes.emplace_back(-0.5 * g + (i + 0.5) * g / nx, ylo + j * dy);
    const double wweight = (g / nx) * dy;

    const int nc = 20;  // cell quadrature for the outer pairings
    std::vector<cplx> znodes;
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
            znodes.push_back(params.cell_point((i + 0.5) / nc, (j + 0.5) / nc));
    const double zweight = params.cell_area() / (nc * nc);

    // kernel matrix, computed once and reused across all random pairs
    std::vector<cplx> K(znodes.size() * wnodes.size());
    parallel_for(znodes.size(), [&](std::size_t a) {
        for (std::size_t b = 0; b < wnodes.size(); ++b)
            K[a * wnodes.size() + b] = fock::strip_kernel(znodes[a], wnodes[b], g);
    });

    auto rng = rng_for("selfadjoint");
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_cell_fn = [&]() {
        // Phi_0 times a random doubly periodic trig polynomial stays in the
        // quasi-periodic class but leaves the holomorphic range of Pi
        const double a1 = uni(rng), b1 = uni(rng), a2 = uni(rng), b2 = uni(rng);
        return [=, &params](cplx z) {
            double r1, r2;
            params.cell_coords(z, r1, r2);
            const cplx trig = 1.0 + a1 * std::cos(2.0 * pi * r1) + b1 * std::sin(2.0 * pi * r2) +
                              a2 * std::cos(2.0 * pi * (r1 + r2)) +
                              cplx(0.0, b2) * std::sin(2.0 * pi * r1);
            return phi(z) * trig;
        };
    };

    for (int trial = 0; trial < 10; ++trial) {
        auto u = random_cell_fn();
        auto v = random_cell_fn();
        std::vector<cplx> uw(wnodes.size()), vw(wnodes.size());
        for (std::size_t b = 0; b < wnodes.size(); ++b) {
            uw[b] = u(wnodes[b]);
            vw[b] = v(wnodes[b]);
        }
        cplx lhs = 0.0, rhs = 0.0;
        for (std::size_t a = 0; a < znodes.size(); ++a) {
            cplx Pu = 0.0, Pv = 0.0;
            for (std::size_t b = 0; b < wnodes.size(); ++b) {
                Pu += K[a * wnodes.size() + b] * uw[b];
                Pv += K[a * wnodes.size() + b] * vw[b];
            }
            Pu *= wweight;
            Pv *= wweight;
            lhs += Pu * std::conj(v(znodes[a]));
            rhs += u(znodes[a]) * std::conj(Pv);
        }
        lhs *= zweight;
        rhs *= zweight;
        CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("cubic products stay in the selection-rule component") {
    // N=3 lattice: <Phi_{k1} conj(Phi_{k2}) Phi_{k3}, Phi_j> vanishes unless
    // j = k1 - k2 + k3 mod 3
    const double g = 1.5;
    const LatticeParams params{g, cplx(0.0, 3.0 * pi / (g * g)), 3};
    const CellQuadrature quad{160, 160};
    std::vector<field> phis;
    for (int j = 0; j < 3; ++j) phis.push_back(phi_k(params, j));
    const double scale = std::pow(cell_lp(phis[0], 2.0, params, quad), 2.0);

    for (const auto& ks : {std::array<int, 3>{0, 1, 2}, {1, 0, 1}, {2, 2, 1}}) {
        const int k1 = ks[0], k2 = ks[1], k3 = ks[2];
        field w = [&, k1, k2, k3](cplx z) {
            return phis[std::size_t(k1)](z) * std::conj(phis[std::size_t(k2)](z)) *
                   phis[std::size_t(k3)](z);
        };
        const int k4 = ((k1 - k2 + k3) % 3 + 3) % 3;
        for (int j = 0; j < 3; ++j) {
            const cplx ip = cell_inner(w, phis[std::size_t(j)], params, quad);
            if (j != k4) CHECK(std::abs(ip) / scale < 1e-8);
            if (j == k4) CHECK(std::abs(ip) / scale > 1e-4);
        }
    }
}

TEST_CASE("Gamma algebra on polynomial-Gaussian test functions") {
    FockFunction u;
    u.poly = {cplx(1.0, 0.2), cplx(0.0, -0.7), cplx(0.5, 0.0)};
    u.q = cplx(0.2, -0.1);

    auto rng = rng_for("gamma-algebra");
    SUBCASE("translated() agrees with the pointwise magnetic translation") {
        const cplx alpha(0.4, 0.6);
        field uf = [&u](cplx z) { return u(z); };
        for (int i = 0; i < 6; ++i) {
            const cplx z = random_point(rng);
            CHECK(std::abs(u.translated(alpha)(z) - magnetic_translate_at(alpha, uf, z)) <
                  1e-13);
        }
    }
    SUBCASE("conjugation of the generators by R_beta shifts by -2 Im(alpha conj(beta))") {
        for (const auto& ab : {std::pair<cplx, cplx>{{1.0, 0.0}, {0.0, 1.0}},
                               {{0.3, 0.8}, {-0.5, 0.4}},
                               {{0.0, 1.0}, {0.7, 0.0}}}) {
            const cplx alpha = ab.first, beta = ab.second;
            const auto lhs = u.translated(beta).apply_gamma(alpha).translated(-beta);
            const double shift = -2.0 * std::imag(alpha * std::conj(beta));
            const auto rhs = u.apply_gamma(alpha).plus(u.scaled(shift));
            for (int i = 0; i < 6; ++i) {
                const cplx z = random_point(rng);
                CHECK(std::abs(lhs(z) - rhs(z)) < 1e-12);
            }
        }
    }
}
