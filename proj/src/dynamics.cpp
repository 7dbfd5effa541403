#include "lll/dynamics.hpp"

#include <cmath>
#include <cstdio>

namespace lll::dynamics {

using fock::interaction_coeff;

CoeffState strip_rhs(const CoeffState& state, int coupling_reach) {
    CoeffState out = CoeffState::zeros(state.kmin, state.kmax(), state.convention);
    const int lo = state.kmin, hi = state.kmax();
    const cplx minus_i(0.0, -1.0);
    for (int k1 = lo; k1 <= hi; ++k1) {
        const cplx c1 = state.at(k1);
        if (c1 == 0.0) continue;
        for (int k2 = lo; k2 <= hi; ++k2) {
            if (std::abs(k2 - k1) > coupling_reach) continue;
            const cplx c2b = std::conj(state.at(k2));
            if (c2b == 0.0) continue;
            for (int k3 = lo; k3 <= hi; ++k3) {
                if (std::abs(k2 - k3) > coupling_reach) continue;
                const int k4 = k1 - k2 + k3;
                if (k4 < lo || k4 > hi) continue;
                const cplx c3 = state.at(k3);
                if (c3 == 0.0) continue;
                out.ref(k4) += minus_i * interaction_coeff(k1, k2, k3, state.convention) *
                               c1 * c2b * c3;
            }
        }
    }
    return out;
}

ConservedValues conserved(const CoeffState& state) {
    ConservedValues out;
    const int lo = state.kmin, hi = state.kmax();
    double P = 0.0;
    for (int k = lo; k <= hi; ++k) {
        out.M += std::norm(state.at(k));
        P += k * std::norm(state.at(k));
    }
    out.P = 2.0 * pi / state.convention.gamma() * P;

    double H = 0.0;
    for (int k1 = lo; k1 <= hi; ++k1) {
        if (state.at(k1) == 0.0) continue;
        for (int k2 = lo; k2 <= hi; ++k2) {
            if (std::abs(k2 - k1) > 14 || state.at(k2) == 0.0) continue;
            for (int k3 = lo; k3 <= hi; ++k3) {
                const int k4 = k1 - k2 + k3;
                if (std::abs(k2 - k3) > 14 || k4 < lo || k4 > hi) continue;
                H += (interaction_coeff(k1, k2, k3, state.convention) *
                      (state.at(k1) * std::conj(state.at(k2)) * state.at(k3) *
                       std::conj(state.at(k4))))
                         .real();
            }
        }
    }
    out.H = 0.25 * H;
    return out;
}

double stationary_residual(const CoeffState& state, double a) {
    // residual of a c = Pi(|u|^2 u) in coefficients; the nonlinearity is
    // i * strip_rhs
    const CoeffState rhs = strip_rhs(state);
    double s = 0.0;
    for (int k = state.kmin; k <= state.kmax(); ++k)
        s += std::norm(a * state.at(k) - cplx(0.0, 1.0) * rhs.at(k));
    return std::sqrt(s);
}

CoeffState symmetry_apply(const CoeffState& state, Symmetry which, double theta) {
    CoeffState out = state;
    const double gamma = state.convention.gamma();
    switch (which) {
        case Symmetry::phase:
            for (auto& v : out.values) v *= std::exp(cplx(0.0, theta));
            break;
        case Symmetry::h_translate:
            for (int k = state.kmin; k <= state.kmax(); ++k)
                out.ref(k) *= std::exp(cplx(0.0, 2.0 * pi * k * theta / gamma));
            break;
        case Symmetry::v_shift: {
            // amplitudes below the window-truncation floor may fall off the edge
            if (std::abs(state.at(state.kmax())) > 1e-14 * state.l2_norm())
                throw WindowOverflow("v_shift pushes coefficient k=" +
                                     std::to_string(state.kmax()) + " out of window");
            for (int k = state.kmax(); k > state.kmin; --k) out.ref(k) = state.at(k - 1);
            out.ref(state.kmin) = 0.0;
            break;
        }
        case Symmetry::reflect: {
            for (int k = state.kmin; k <= state.kmax(); ++k) {
                const int kr = -k;
                out.ref(k) = state.in_window(kr) ? state.at(kr) : cplx(0.0);
            }
            for (int k = state.kmin; k <= state.kmax(); ++k)
                if (std::abs(state.at(k)) > 1e-14 * state.l2_norm() && !state.in_window(-k))
                    throw WindowOverflow("reflect pushes coefficient k=" + std::to_string(k) +
                                         " out of window");
            break;
        }
    }
    return out;
}

// ---- cell system ------------------------------------------------------------

CellCouplings::CellCouplings(const LatticeParams& params, const CellQuadrature& quad)
    : params_(params), N_(params.N) {
    params_.validate();
    const double g = params_.gamma;
    cn_ = std::sqrt(2.0 / pi) * std::exp(-pi * pi / (2.0 * g * g)) / (g * N_);

    std::vector<lattice::field> phis;
    for (int j = 0; j < N_; ++j) phis.push_back(lattice::phi_k(params_, j));

    table_.assign(std::size_t(N_) * N_ * N_, 0.0);
    std::vector<std::array<int, 3>> jobs;
    for (int j1 = 0; j1 < N_; ++j1)
        for (int j2 = 0; j2 < N_; ++j2)
            for (int j3 = 0; j3 < N_; ++j3) jobs.push_back({j1, j2, j3});
    parallel_for(jobs.size(), [&](std::size_t idx) {
        const auto [j1, j2, j3] = jobs[idx];
        const int j4 = ((j1 - j2 + j3) % N_ + N_) % N_;
        table_[std::size_t(j1) * N_ * N_ + std::size_t(j2) * N_ + j3] =
            quad.integrate(params_, [&](cplx z) {
                return phis[j1](z) * std::conj(phis[j2](z)) * phis[j3](z) * std::conj(phis[j4](z));
            });
    });
}

cplx CellCouplings::coupling(int j1, int j2, int j3) const {
    auto wrap = [this](int j) { return ((j % N_) + N_) % N_; };
    return table_[std::size_t(wrap(j1)) * N_ * N_ + std::size_t(wrap(j2)) * N_ + wrap(j3)];
}

CellState cell_rhs(const CellState& state, const CellCouplings& couplings) {
    const int N = state.N();
    if (N != couplings.params().N)
        throw std::invalid_argument("cell_rhs: state size does not match the coupling table");
    CellState out{std::vector<cplx>(N, 0.0), state.params};
    const cplx minus_i(0.0, -1.0);
    for (int j1 = 0; j1 < N; ++j1)
        for (int j2 = 0; j2 < N; ++j2)
            for (int j3 = 0; j3 < N; ++j3) {
                const int j = ((j1 - j2 + j3) % N + N) % N;
                out.values[j] += minus_i * couplings.C_N() * couplings.coupling(j1, j2, j3) *
                                 state.values[j1] * std::conj(state.values[j2]) * state.values[j3];
            }
    return out;
}

ConservedValues conserved(const CellState& state, const CellCouplings& couplings) {
    ConservedValues out;
    for (cplx v : state.values) out.M += std::norm(v);
    const int N = state.N();
    if (N != couplings.params().N)
        throw std::invalid_argument("conserved: state size does not match the coupling table");
    cplx H = 0.0;
    for (int j1 = 0; j1 < N; ++j1)
        for (int j2 = 0; j2 < N; ++j2)
            for (int j3 = 0; j3 < N; ++j3) {
                const int j = ((j1 - j2 + j3) % N + N) % N;
                H += couplings.coupling(j1, j2, j3) * state.values[j1] *
                     std::conj(state.values[j2]) * state.values[j3] * std::conj(state.values[j]);
            }
    out.H = 0.25 * couplings.C_N() * H.real();
    return out;
}

// ---- adaptive Dormand-Prince 5(4) -------------------------------------------

namespace {

const double A21 = 1.0 / 5;
const double A31 = 3.0 / 40, A32 = 9.0 / 40;
const double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
const double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
             A54 = -212.0 / 729;
const double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
             A65 = -5103.0 / 18656;
const double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
             B6 = 11.0 / 84;
const double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
             E6 = 22.0 / 525, E7 = -1.0 / 40;

std::vector<cplx> axpy(const std::vector<cplx>& y, double h,
                       std::initializer_list<std::pair<double, const std::vector<cplx>*>> ks) {
    std::vector<cplx> out = y;
    for (auto [c, k] : ks)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * c * (*k)[i];
    return out;
}

}  // namespace

Trajectory integrate_raw(const RhsFn& rhs, std::vector<cplx> y0, double t_end,
                         const StepControl& control, const MonitorFn& monitor) {
    Trajectory traj;
    double t = 0.0;
    double h = std::min(control.dt0, std::abs(t_end));
    const double dir = t_end >= 0.0 ? 1.0 : -1.0;
    h *= dir;

    std::vector<cplx> y = std::move(y0);
    auto record = [&](double tt, const std::vector<cplx>& yy) {
        traj.times.push_back(tt);
        traj.states.push_back(yy);
        if (monitor) traj.drift.push_back(monitor(tt, yy));
    };
    record(t, y);

    std::vector<cplx> k1 = rhs(t, y);
    const double hmin = 1e-12 * std::max(std::abs(t_end), 1.0);
    int guard = 0;
    while (dir * (t_end - t) > 0.0) {
        if (++guard > 2000000) throw StepFailure("step count exceeded");
        if (dir * (t + h - t_end) > 0.0) h = t_end - t;
        if (std::abs(h) < hmin) throw StepFailure("step size underflow at t=" + std::to_string(t));

        const auto k2 = rhs(t + A21 * h, axpy(y, h, {{A21, &k1}}));
        const auto k3 = rhs(t + 0.3 * h, axpy(y, h, {{A31, &k1}, {A32, &k2}}));
        const auto k4 = rhs(t + 0.8 * h, axpy(y, h, {{A41, &k1}, {A42, &k2}, {A43, &k3}}));
        const auto k5 =
            rhs(t + 8.0 / 9.0 * h, axpy(y, h, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}}));
        const auto k6 = rhs(
            t + h, axpy(y, h, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}}));
        const auto ynew =
            axpy(y, h, {{B1, &k1}, {B3, &k3}, {B4, &k4}, {B5, &k5}, {B6, &k6}});
        const auto k7 = rhs(t + h, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const cplx e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                                E6 * k6[i] + E7 * k7[i]);
            const double sc =
                control.atol + control.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += std::norm(e) / (sc * sc);
        }
        err = std::sqrt(err / std::max<std::size_t>(y.size(), 1));

        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            record(t, y);
        }
        const double fac = std::clamp(0.9 * std::pow(err > 0.0 ? err : 1e-16, -0.2), 0.2, 5.0);
        h *= fac;
    }
    return traj;
}

CoeffState with_values(const CoeffState& like, std::vector<cplx> values) {
    CoeffState out = like;
    if (values.size() != like.values.size())
        throw std::invalid_argument("with_values: size mismatch");
    out.values = std::move(values);
    return out;
}

Trajectory integrate(const CoeffState& state0, double t_end, const StepControl& control) {
    const auto c0 = conserved(state0);
    auto rhs = [&state0](double, const std::vector<cplx>& y) {
        return strip_rhs(with_values(state0, y)).values;
    };
    auto monitor = [&](double t, const std::vector<cplx>& y) {
        const auto c = conserved(with_values(state0, y));
        const double m0 = std::max(std::abs(c0.M), 1e-300);
        const double h0 = std::max(std::abs(c0.H), 1e-300);
        const double p0 = std::max(std::abs(*c0.P), 1e-12 * c0.M);
        return DriftRecord{t, (c.M - c0.M) / m0, (c.H - c0.H) / h0, (*c.P - *c0.P) / p0};
    };
    Trajectory traj = integrate_raw(rhs, state0.values, t_end, control, monitor);

    // truncation monitor: the window edge must stay essentially empty
    for (const auto& y : traj.states) {
        double n2 = 0.0;
        for (cplx v : y) n2 += std::norm(v);
        const double edge = std::max(std::abs(y.front()), std::abs(y.back()));
        if (n2 > 0.0)
            traj.max_edge_fraction = std::max(traj.max_edge_fraction, edge / std::sqrt(n2));
    }
    traj.truncation_flagged = traj.max_edge_fraction > 1e-8;
    return traj;
}

Trajectory integrate(const CellState& state0, const CellCouplings& couplings, double t_end,
                     const StepControl& control) {
    const auto c0 = conserved(state0, couplings);
    auto rhs = [&](double, const std::vector<cplx>& y) {
        return cell_rhs(CellState{y, state0.params}, couplings).values;
    };
    auto monitor = [&](double t, const std::vector<cplx>& y) {
        const auto c = conserved(CellState{y, state0.params}, couplings);
        return DriftRecord{t, (c.M - c0.M) / std::max(std::abs(c0.M), 1e-300),
                           (c.H - c0.H) / std::max(std::abs(c0.H), 1e-300), 0.0};
    };
    return integrate_raw(rhs, state0.values, t_end, control, monitor);
}

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, const CoeffState& like) {
    std::string out = "t,k,re,im,M,H,P\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const auto st = with_values(like, traj.states[s]);
        const auto c = conserved(st);
        for (int k = like.kmin; k <= like.kmax(); ++k) {
            out += fmt(traj.times[s]) + ',' + std::to_string(k) + ',' + fmt(st.at(k).real()) +
                   ',' + fmt(st.at(k).imag()) + ',' + fmt(c.M) + ',' + fmt(c.H) + ',' +
                   fmt(*c.P) + '\n';
        }
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj, const CellState& like,
                           const CellCouplings& couplings) {
    std::string out = "t,k,re,im,M,H,P\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const CellState st{traj.states[s], like.params};
        const auto c = conserved(st, couplings);
        for (int j = 0; j < st.N(); ++j) {
            out += fmt(traj.times[s]) + ',' + std::to_string(j) + ',' +
                   fmt(st.values[j].real()) + ',' + fmt(st.values[j].imag()) + ',' + fmt(c.M) +
                   ',' + fmt(c.H) + ",0\n";
        }
    }
    return out;
}

}  // namespace lll::dynamics
