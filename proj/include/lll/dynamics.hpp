#ifndef LLL_DYNAMICS_HPP
#define LLL_DYNAMICS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lll/fock.hpp"
#include "lll/lattice.hpp"

namespace lll::dynamics {

using fock::BasisConvention;
using fock::CoeffState;
using lattice::CellQuadrature;
using lattice::LatticeParams;

/// Mass, momentum and Hamiltonian in coefficient form:
///   M = sum |c_k|^2,  P = (2 pi/gamma) sum k |c_k|^2,
///   H = (1/4) sum_{k1-k2+k3=k4} A_{k1,k2,k3} c_{k1} conj(c_{k2}) c_{k3} conj(c_{k4}).
struct ConservedValues {
    double M = 0.0;
    double H = 0.0;
    std::optional<double> P;  // strip only
};

/// d/dt c_k = -i sum_{k1-k2+k3=k} A_{k1,k2,k3} c_{k1} conj(c_{k2}) c_{k3},
/// triple loop over the window with early exit on Gaussian-negligible
/// couplings (|k2-k1| or |k2-k3| beyond `coupling_reach`).
CoeffState strip_rhs(const CoeffState& state, int coupling_reach = 12);

ConservedValues conserved(const CoeffState& state);

/// l^2 residual of the M-stationary equation a c = sum A c cbar c.
double stationary_residual(const CoeffState& state, double a);

enum class Symmetry { phase, h_translate, v_shift, reflect };

/// The four coefficient-space symmetries: c_k -> e^{i theta} c_k,
/// e^{2 pi i k theta/gamma} c_k, c_{k+1}, c_{-k}. v_shift throws
/// WindowOverflow when a nonzero coefficient would leave the window.
CoeffState symmetry_apply(const CoeffState& state, Symmetry which, double theta = 0.0);

/// Finite cell state (lambda_0, ..., lambda_{N-1}) over the Phi_j basis.
struct CellState {
    std::vector<cplx> values;
    LatticeParams params;

    int N() const { return int(values.size()); }
};

/// Quadruple overlaps int_K Phi_{j1} conj(Phi_{j2}) Phi_{j3} conj(Phi_{j4});
/// computed once per lattice by cell quadrature and cached.
class CellCouplings {
public:
    CellCouplings(const LatticeParams& params, const CellQuadrature& quad = {.n1 = 128, .n2 = 128});
    cplx coupling(int j1, int j2, int j3) const;  // j4 = j1 - j2 + j3 mod N
    double C_N() const { return cn_; }
    const LatticeParams& params() const { return params_; }

private:
    LatticeParams params_;
    int N_;
    double cn_;
    std::vector<cplx> table_;
};

/// i d/dt lambda_j = C_N sum_{j1-j2+j3=j mod N} coupling * lambda lambdabar lambda.
CellState cell_rhs(const CellState& state, const CellCouplings& couplings);

ConservedValues conserved(const CellState& state, const CellCouplings& couplings);

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double dt0 = 1e-3;
};

/// One accepted-step record of the conserved-quantity drift monitor.
struct DriftRecord {
    double t;
    double M_rel;
    double H_rel;
    double P_rel;  // 0 when not tracked
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<cplx>> states;
    std::vector<DriftRecord> drift;
    bool truncation_flagged = false;  // outermost-mode amplitude exceeded 1e-8 * ||state||
    double max_edge_fraction = 0.0;

    const std::vector<cplx>& final_state() const { return states.back(); }
};

using RhsFn = std::function<std::vector<cplx>(double, const std::vector<cplx>&)>;
using MonitorFn = std::function<DriftRecord(double, const std::vector<cplx>&)>;

/// Adaptive Dormand-Prince 5(4) over a complex state vector. Steps are
/// accepted on the usual mixed abs/rel error norm; throws StepFailure when
/// dt underflows below 1e-12 * |t_end|.
Trajectory integrate_raw(const RhsFn& rhs, std::vector<cplx> y0, double t_end,
                         const StepControl& control, const MonitorFn& monitor = {});

Trajectory integrate(const CoeffState& state0, double t_end, const StepControl& control = {});
Trajectory integrate(const CellState& state0, const CellCouplings& couplings, double t_end,
                     const StepControl& control = {});

CoeffState with_values(const CoeffState& like, std::vector<cplx> values);

/// CSV export with columns t,k,re,im,M,H,P (one row per time and mode) and a
/// JSON manifest of the run parameters.
std::string trajectory_csv(const Trajectory& traj, const CoeffState& like);
std::string trajectory_csv(const Trajectory& traj, const CellState& like,
                           const CellCouplings& couplings);

}  // namespace lll::dynamics

#endif
