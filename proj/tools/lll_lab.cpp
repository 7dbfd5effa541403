// lll-lab: batch driver for the lowest-Landau-level lattice experiments.
// Every subcommand writes plot-ready CSV/JSON plus a manifest echoing the
// resolved configuration. Exit codes: 0 ok, 1 numeric failure (error name on
// stderr), 2 configuration failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lll/dynamics.hpp"
#include "lll/fock.hpp"
#include "lll/lattice.hpp"
#include "lll/linstab.hpp"
#include "lll/specfun.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using nlohmann::json;
using namespace lll;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Output {
    std::string dir = ".";
    std::string format = "csv";
    json manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<std::string> files;

    void write_text(const std::string& name, const std::string& body) {
        std::filesystem::create_directories(dir);
        std::ofstream out(dir + "/" + name, std::ios::binary);
        out << body;
        files.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

    // tables honor the --format knob; the csv body is the canonical form
    void write_table(const std::string& stem, const std::string& csv_body) {
        if (format == "json") {
            json rows = json::array();
            std::stringstream ss(csv_body);
            std::string line;
            std::vector<std::string> cols;
            while (std::getline(ss, line)) {
                std::vector<std::string> cells;
                std::stringstream ls(line);
                std::string cell;
                while (std::getline(ls, cell, ',')) cells.push_back(cell);
                if (cols.empty()) {
                    cols = cells;
                    continue;
                }
                json row;
                for (std::size_t i = 0; i < cols.size() && i < cells.size(); ++i) {
                    try {
                        row[cols[i]] = std::stod(cells[i]);
                    } catch (...) {
                        row[cols[i]] = cells[i];
                    }
                }
                rows.push_back(row);
            }
            write_json(stem + ".json", rows);
        } else {
            write_text(stem + ".csv", csv_body);
        }
    }
    void finish(const std::string& subcommand) {
        manifest["schema"] = 1;
        manifest["subcommand"] = subcommand;
        manifest["version"] = kVersion;
        manifest["outputs"] = files;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::filesystem::create_directories(dir);
        std::ofstream out(dir + "/" + subcommand + "_manifest.json", std::ios::binary);
        out << manifest.dump(2) << "\n";
    }
};

void add_output_options(CLI::App* cmd, Output& out) {
    cmd->add_option("--out", out.dir, "output directory")->capture_default_str();
    cmd->add_option("--format", out.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

// every run's manifest echoes the full resolved option set of its subcommand
json resolved_config(const CLI::App& cmd) {
    json j;
    for (const CLI::Option* opt : cmd.get_options()) {
        const auto& lnames = opt->get_lnames();
        if (lnames.empty() || lnames[0] == "help") continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) {
                if (!value.empty()) value += ";";
                value += r;
            }
        } else {
            value = opt->get_default_str();
        }
        j[lnames[0]] = value;
    }
    return j;
}

fock::CoeffState parse_modes(const std::string& modes_arg, int kmin, int kmax,
                             const fock::BasisConvention& conv) {
    // "k:re,im;k:re,im;..."
    auto state = fock::CoeffState::zeros(kmin, kmax, conv);
    std::stringstream ss(modes_arg);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        int k;
        double re, im;
        if (std::sscanf(item.c_str(), "%d:%lf,%lf", &k, &re, &im) != 3)
            throw CLI::ValidationError("--modes", "expected k:re,im entries separated by ';'");
        if (!state.in_window(k))
            throw CLI::ValidationError("--modes", "mode outside the window");
        state.ref(k) = cplx(re, im);
    }
    return state;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * double(i) / (n - 1));
    return out;
}

// smooth purely-imaginary Gaussian profile; admissible for the linearized flow
fock::CoeffState default_admissible_state(int kwidth, double sigma) {
    auto state = fock::CoeffState::zeros(-kwidth, kwidth, fock::BasisConvention::hexa());
    for (int k = -kwidth; k <= kwidth; ++k)
        state.ref(k) = cplx(0.0, std::exp(-double(k) * double(k) / (2.0 * sigma * sigma)));
    return state;
}

int run_theta_check(Output& out, const TruncationPolicy& policy) {
    struct Row {
        std::string name;
        double value, threshold;
    };
    std::vector<Row> rows;
    const auto hexa = lattice::LatticeParams::hexagonal();

    rows.push_back({"poisson_residual_pi_0", specfun::poisson_residual(pi, 0.0, policy), 1e-12});
    rows.push_back({"poisson_residual_gamma2_half",
                    specfun::poisson_residual(hexa.gamma * hexa.gamma, 0.5, policy), 1e-12});
    {
        const cplx z(0.3, 0.2), tau(0.0, 1.0);
        const cplx lhs = specfun::theta(z + tau, tau, policy);
        const cplx rhs = specfun::theta_quasi_period(z, tau) * specfun::theta(z, tau, policy);
        rows.push_back({"theta_quasi_periodicity", std::abs(lhs - rhs), 1e-11});
        rows.push_back({"theta_oddness",
                        std::abs(specfun::theta(-z, tau, policy) + specfun::theta(z, tau, policy)),
                        1e-11});
        rows.push_back({"theta_zero_at_origin", std::abs(specfun::theta(0.0, tau, policy)), 1e-12});
    }
    rows.push_back({"gauss_sum_odd_order",
                    std::abs(specfun::gauss_sum(1, hexa.gamma, specfun::SumParity::all, policy)),
                    0.0});
    {
        const double xi = 0.37, g = hexa.gamma;
        rows.push_back({"ell_equals_g_plus_h",
                        std::abs(specfun::symbol_g(xi, g, 0, policy) +
                                 specfun::symbol_h(xi, g, 0, policy) -
                                 specfun::symbol_ell(xi, g, 0, policy)),
                        1e-13});
    }

    std::string csv = "check,value,threshold,pass\n";
    bool all_pass = true;
    for (const auto& r : rows) {
        const bool pass = r.value <= r.threshold;
        all_pass = all_pass && pass;
        csv += r.name + ',' + fmt(r.value) + ',' + fmt(r.threshold) + ',' +
               (pass ? "1" : "0") + '\n';
        std::cout << (pass ? "[ok]   " : "[FAIL] ") << r.name << " = " << r.value << "\n";
    }
    out.write_table("theta_check", csv);
    return all_pass ? 0 : 1;
}

int run_lattice_info(Output& out, const lattice::LatticeParams& params, int quad_n) {
    const auto quad = lattice::CellQuadrature{quad_n, quad_n};
    const double l0 = lattice::lambda0(params);
    const double l0_gen = lattice::lambda0_general(params);
    const auto phi0 = lattice::phi_k(params, 0);
    const double m2 = std::pow(lattice::cell_lp(phi0, 2.0, params, quad), 2.0);
    const double m4 = std::pow(lattice::cell_lp(phi0, 4.0, params, quad), 4.0);
    const double g = params.gamma;
    const double m2_closed =
        g * params.N * std::sqrt(pi / 2.0) * std::exp(pi * pi / (2.0 * g * g));

    json j;
    j["gamma"] = params.gamma;
    j["tau"] = {params.tau.real(), params.tau.imag()};
    j["N"] = params.N;
    j["lambda0"] = l0;
    j["lambda0_general_sum"] = l0_gen;
    j["lambda0_quadrature_ratio"] = m4 / m2;
    j["cell_l2_squared"] = m2;
    j["cell_l2_squared_closed_form"] = m2_closed;
    j["cell_l4_fourth"] = m4;
    j["C_N"] = 1.0 / m2_closed;
    out.write_json("lattice_info.json", j);
    std::cout << "lambda0 = " << l0 << " (general sum " << l0_gen << ", quadrature "
              << m4 / m2 << ")\n";
    return 0;
}

int run_stationary(Output& out, const fock::BasisConvention& conv, double c_amp, int k_mode) {
    const double g = conv.gamma();
    auto state = fock::CoeffState::unit(k_mode, k_mode - 4, k_mode + 4, conv, c_amp);
    const double a_exact = c_amp * c_amp / (g * std::sqrt(pi));
    const double r_stat = dynamics::stationary_residual(state, a_exact);

    auto two = fock::CoeffState::zeros(-4, 5, conv);
    two.ref(0) = 1.0;
    two.ref(1) = 1.0;
    double best_a = 0.0, best_r = 1e300;
    for (int i = 0; i <= 400; ++i) {
        const double a = 2.0 * double(i) / 400.0 / (g * std::sqrt(pi));
        const double r = dynamics::stationary_residual(two, a);
        if (r < best_r) {
            best_r = r;
            best_a = a;
        }
    }

    std::string csv = "case,a,residual\n";
    csv += "single_mode," + fmt(a_exact) + ',' + fmt(r_stat) + '\n';
    csv += "two_mode_best_fit," + fmt(best_a) + ',' + fmt(best_r) + '\n';
    out.write_table("stationary", csv);
    std::cout << "single-mode residual " << r_stat << ", two-mode best residual " << best_r
              << "\n";
    return 0;
}

int run_spectrum(Output& out, linstab::SymbolTable::Kind kind, double gamma, int grid) {
    const auto sym = linstab::build_symbol(kind, gamma);
    const auto rep = linstab::det_scan(sym, grid);

    std::string csv = "xi,a,b,mu_re,mu_im,det\n";
    for (int m = 0; m < grid; ++m) {
        const double xi = double(m) / grid;
        const cplx mu = sym.mu(xi);
        csv += fmt(xi) + ',' + fmt(sym.a(xi)) + ',' + fmt(sym.b(xi)) + ',' + fmt(mu.real()) +
               ',' + fmt(mu.imag()) + ',' + fmt(sym.det(xi)) + '\n';
    }
    out.write_table("spectrum", csv);

    json j;
    j["kind"] = kind == linstab::SymbolTable::Kind::rect ? "rect" : "hexa";
    j["gamma"] = sym.gamma;
    j["lambda"] = sym.lambda;
    j["det_min"] = rep.det_min;
    j["det_max"] = rep.det_max;
    j["max_growth_rate"] = rep.max_growth_rate;
    j["verdict"] = rep.verdict;
    out.write_json("spectrum_report.json", j);
    std::cout << "verdict: " << rep.verdict << " (det range [" << rep.det_min << ", "
              << rep.det_max << "])\n";
    return 0;
}

int run_scan_gamma(Output& out, double from, double to, int grid) {
    const double g0 = linstab::gamma_threshold_scan(from, to, grid);
    json j;
    j["gamma0"] = g0;
    j["from"] = from;
    j["to"] = to;
    out.write_json("scan_gamma.json", j);
    std::cout << "gamma0 = " << g0 << "\n";
    return 0;
}

int run_decay(Output& out, double tmin, double tmax, int ntimes, int grid, int kwidth,
              double sigma) {
    const auto sym = linstab::build_symbol(linstab::SymbolTable::Kind::hexa, 0.0);
    const auto state = default_admissible_state(kwidth, sigma);
    const auto table = linstab::linf_decay_experiment(state, logspace(tmin, tmax, ntimes), sym,
                                                      grid);
    std::string csv = "t,sup_norm,fitted_slope_so_far\n";
    for (std::size_t i = 0; i < table.times.size(); ++i)
        csv += fmt(table.times[i]) + ',' + fmt(table.sup_norms[i]) + ',' +
               fmt(table.slope_so_far[i]) + '\n';
    out.write_table("decay", csv);
    out.manifest["fitted_slope"] = table.fitted_slope;
    std::cout << "fitted sup-norm slope " << table.fitted_slope << "\n";
    return 0;
}

int run_growth(Output& out, double theta, int k0, double tmax, int grid) {
    const auto sym = linstab::build_symbol(linstab::SymbolTable::Kind::hexa, 0.0);
    const auto table = linstab::growth_experiment(theta, k0, tmax, sym, grid);
    std::string csv = "t,norm,bound_ratio\n";
    for (std::size_t i = 0; i < table.times.size(); ++i)
        csv += fmt(table.times[i]) + ',' + fmt(table.norms[i]) + ',' +
               fmt(table.bound_ratios[i]) + '\n';
    out.write_table("growth", csv);
    json j;
    j["fitted_exponent"] = table.fitted_exponent;
    j["max_bound_ratio"] = table.max_bound_ratio;
    j["theta"] = theta;
    j["k0"] = k0;
    out.write_json("growth_summary.json", j);
    std::cout << "fitted growth exponent " << table.fitted_exponent << ", max bound ratio "
              << table.max_bound_ratio << "\n";
    return 0;
}

int run_instability(Output& out, double gamma, double tmax) {
    const auto sym = linstab::build_symbol(linstab::SymbolTable::Kind::rect, gamma);
    const auto match = linstab::rect_instability_rate(sym, tmax);
    json j;
    j["gamma"] = gamma;
    j["predicted_rate"] = match.predicted;
    j["measured_rate"] = match.measured;
    j["relative_error"] =
        match.predicted > 0.0 ? std::abs(match.measured - match.predicted) / match.predicted
                              : 0.0;
    out.write_json("instability.json", j);
    std::cout << "predicted " << match.predicted << ", measured " << match.measured << "\n";
    return 0;
}

int run_moments(Output& out, double T, int ntimes) {
    const auto sym = linstab::build_symbol(linstab::SymbolTable::Kind::hexa, 0.0);
    auto state = fock::CoeffState::zeros(-6, 6, fock::BasisConvention::hexa());
    state.ref(0) = cplx(0.4, 1.0);
    state.ref(1) = cplx(0.3, -0.2);
    state.ref(-2) = cplx(-0.1, 0.25);
    std::vector<double> times(ntimes);
    for (int i = 0; i < ntimes; ++i) times[i] = T * double(i) / (ntimes - 1);
    const auto table = linstab::moment_trace(state, times, sym);

    std::string csv = "t,R0,I0,R1,I1,R2,I2,R3,I3,R4,I4\n";
    for (std::size_t i = 0; i < table.times.size(); ++i) {
        csv += fmt(table.times[i]);
        for (int j = 0; j <= 4; ++j)
            csv += ',' + fmt(table.R[std::size_t(j)][i]) + ',' + fmt(table.I[std::size_t(j)][i]);
        csv += '\n';
    }
    out.write_table("moments", csv);
    json j;
    j["lambda"] = table.constants.lambda;
    j["L"] = table.constants.L;
    j["L2"] = table.constants.L2;
    j["L3"] = table.constants.L3;
    out.write_json("moment_constants.json", j);
    std::cout << "moment constants: lambda " << table.constants.lambda << ", L3 "
              << table.constants.L3 << "\n";
    return 0;
}

int run_mu_profile(Output& out, int grid) {
    const auto sym = linstab::build_symbol(linstab::SymbolTable::Kind::hexa, 0.0);
    std::string csv = "xi,mu,mu1,mu2,mu3\n";
    for (int m = 1; m < grid; ++m) {
        const double xi = double(m) / grid;
        const auto jet = sym.mu_jet(xi);
        csv += fmt(xi) + ',' + fmt(jet[0]) + ',' + fmt(jet[1]) + ',' + fmt(jet[2]) + ',' +
               fmt(jet[3]) + '\n';
    }
    out.write_table("mu_profile", csv);
    const auto zeros = linstab::mu_second_derivative_zeros(sym);
    json j;
    j["C"] = linstab::mu_expansion_constant(sym);
    j["lambda"] = sym.lambda;
    j["mu2_zeros"] = zeros;
    out.write_json("mu_profile.json", j);
    std::cout << "C = " << j["C"] << ", mu'' zeros at " << j["mu2_zeros"].dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lowest Landau level lattice laboratory"};
    app.require_subcommand(1);

    Output out;
    TruncationPolicy policy;
    app.add_option("--eps", policy.eps, "series tail tolerance")->capture_default_str();
    app.add_option("--max-terms", policy.max_terms, "series term cap")->capture_default_str();

    // ---- theta-check
    auto* c_theta = app.add_subcommand("theta-check", "special-function identity battery; CSV columns: check,value,threshold,pass");
    add_output_options(c_theta, out);

    // ---- lattice-info
    auto* c_info = app.add_subcommand("lattice-info", "stationary constants and cell norms (JSON report)");
    bool info_hexa = false;
    double info_rect_gamma = 0.0, info_gamma = 0.0, info_tau_re = 0.0, info_tau_im = 0.0;
    int info_N = 1, info_quad = 256;
    c_info->add_flag("--hexa", info_hexa, "hexagonal (Abrikosov) lattice");
    c_info->add_option("--rect-gamma", info_rect_gamma, "rectangular lattice with this gamma");
    c_info->add_option("--gamma", info_gamma, "general lattice gamma");
    c_info->add_option("--tau-re", info_tau_re, "general lattice Re tau");
    c_info->add_option("--tau-im", info_tau_im, "general lattice Im tau");
    c_info->add_option("--N", info_N, "flux number")->capture_default_str();
    c_info->add_option("--quad", info_quad, "cell quadrature nodes per direction")
        ->capture_default_str();
    add_output_options(c_info, out);

    // ---- stationary
    auto* c_stat = app.add_subcommand("stationary", "M-stationary residual checks; CSV columns: case,a,residual");
    bool stat_hexa = true;
    double stat_rect_gamma = 0.0, stat_c = 1.0;
    int stat_k = 0;
    c_stat->add_flag("--hexa,!--no-hexa", stat_hexa, "hexagonal basis")->capture_default_str();
    c_stat->add_option("--rect-gamma", stat_rect_gamma, "rectangular basis with this gamma");
    c_stat->add_option("--c", stat_c, "amplitude")->capture_default_str();
    c_stat->add_option("--k", stat_k, "mode index")->capture_default_str();
    add_output_options(c_stat, out);

    // ---- simulate
    auto* c_sim = app.add_subcommand("simulate", "nonlinear trajectory; CSV columns: t,k,re,im,M,H,P");
    bool sim_cell = false, sim_hexa = false;
    double sim_rect_gamma = 0.0, sim_T = 10.0, sim_rtol = 1e-10, sim_atol = 1e-12, sim_c = 1.0;
    int sim_N = 1, sim_kmin = -8, sim_kmax = 8;
    std::string sim_modes, sim_coeffs_file, sim_lambdas;
    c_sim->add_flag("--cell", sim_cell, "finite cell system instead of the strip");
    c_sim->add_flag("--hexa", sim_hexa, "hexagonal lattice/basis");
    c_sim->add_option("--rect-gamma", sim_rect_gamma, "rectangular lattice with this gamma");
    c_sim->add_option("--N", sim_N, "cell flux number")->capture_default_str();
    c_sim->add_option("--c", sim_c, "N=1 cell amplitude")->capture_default_str();
    c_sim->add_option("--lambdas", sim_lambdas, "cell amplitudes re,im;re,im;...");
    c_sim->add_option("--modes", sim_modes, "strip data k:re,im;k:re,im;...");
    c_sim->add_option("--coeffs", sim_coeffs_file, "strip data from a CoeffState JSON file");
    c_sim->add_option("--kmin", sim_kmin, "strip window lower edge")->capture_default_str();
    c_sim->add_option("--kmax", sim_kmax, "strip window upper edge")->capture_default_str();
    c_sim->add_option("--T", sim_T, "final time")->capture_default_str();
    c_sim->add_option("--rtol", sim_rtol, "relative tolerance")->capture_default_str();
    c_sim->add_option("--atol", sim_atol, "absolute tolerance")->capture_default_str();
    add_output_options(c_sim, out);

    // ---- spectrum
    auto* c_spec = app.add_subcommand("spectrum", "linearization symbols; CSV columns: xi,a,b,mu_re,mu_im,det");
    bool spec_hexa = false;
    double spec_rect_gamma = 0.0;
    int spec_grid = 4096;
    c_spec->add_flag("--hexa", spec_hexa, "hexagonal symbol");
    c_spec->add_option("--rect-gamma", spec_rect_gamma, "rectangular symbol with this gamma");
    c_spec->add_option("--grid", spec_grid, "xi grid size")->check(CLI::Range(64, 1 << 22))
        ->capture_default_str();
    add_output_options(c_spec, out);

    // ---- scan-gamma
    auto* c_scan = app.add_subcommand("scan-gamma", "rectangular stability threshold bisection (JSON report)");
    double scan_from = 2.0, scan_to = 3.0;
    int scan_grid = 2048;
    c_scan->add_option("--from", scan_from, "lower gamma")->capture_default_str();
    c_scan->add_option("--to", scan_to, "upper gamma")->capture_default_str();
    c_scan->add_option("--grid", scan_grid, "det scan grid")->capture_default_str();
    add_output_options(c_scan, out);

    // ---- decay
    auto* c_decay = app.add_subcommand("decay", "dispersive decay; CSV columns: t,sup_norm,fitted_slope_so_far");
    double decay_tmin = 1e2, decay_tmax = 1e5, decay_sigma = 1.0;
    int decay_ntimes = 16, decay_grid = 16384, decay_kwidth = 8;
    c_decay->add_option("--tmin", decay_tmin)->capture_default_str();
    c_decay->add_option("--tmax", decay_tmax)->capture_default_str();
    c_decay->add_option("--ntimes", decay_ntimes)->capture_default_str();
    c_decay->add_option("--grid", decay_grid)->capture_default_str();
    c_decay->add_option("--kwidth", decay_kwidth, "data window half-width")->capture_default_str();
    c_decay->add_option("--sigma", decay_sigma, "data Gaussian width")->capture_default_str();
    add_output_options(c_decay, out);

    // ---- growth
    auto* c_growth = app.add_subcommand("growth", "growth optimality; CSV columns: t,norm,bound_ratio");
    double growth_theta = 0.6, growth_tmax = 1e6;
    int growth_k0 = 2, growth_grid = 16384;
    c_growth->add_option("--theta", growth_theta)->check(CLI::Range(0.5001, 10.0))
        ->capture_default_str();
    c_growth->add_option("--k0", growth_k0)->check(CLI::Range(2, 20))->capture_default_str();
    c_growth->add_option("--tmax", growth_tmax)->capture_default_str();
    c_growth->add_option("--grid", growth_grid)->capture_default_str();
    add_output_options(c_growth, out);

    // ---- instability
    auto* c_inst = app.add_subcommand("instability", "rectangular growth-rate match (JSON report)");
    double inst_gamma = std::sqrt(pi), inst_tmax = 60.0;
    c_inst->add_option("--gamma", inst_gamma)->capture_default_str();
    c_inst->add_option("--tmax", inst_tmax)->capture_default_str();
    add_output_options(c_inst, out);

    // ---- moments
    auto* c_mom = app.add_subcommand("moments", "moment traces; CSV columns: t,R0,I0,...,R4,I4");
    double mom_T = 50.0;
    int mom_ntimes = 101;
    c_mom->add_option("--T", mom_T)->capture_default_str();
    c_mom->add_option("--ntimes", mom_ntimes)->check(CLI::Range(2, 100000))
        ->capture_default_str();
    add_output_options(c_mom, out);

    // ---- mu-profile
    auto* c_mu = app.add_subcommand("mu-profile", "mu profile; CSV columns: xi,mu,mu1,mu2,mu3");
    int mu_grid = 1024;
    c_mu->add_option("--grid", mu_grid)->check(CLI::Range(64, 1 << 20))->capture_default_str();
    add_output_options(c_mu, out);

    // ---- tau-scan (experimental)
    auto* c_tau = app.add_subcommand(
        "tau-scan", "EXPERIMENTAL general-tau1 scan, no correctness claim; CSV columns: tau1,max_growth");
    double tau_gamma = std::sqrt(pi), tau_from = -0.5, tau_to = 0.0;
    int tau_n = 26, tau_grid = 256;
    c_tau->add_option("--gamma", tau_gamma)->capture_default_str();
    c_tau->add_option("--from", tau_from, "lower tau1")->capture_default_str();
    c_tau->add_option("--to", tau_to, "upper tau1")->capture_default_str();
    c_tau->add_option("--n", tau_n)->check(CLI::Range(2, 10000))->capture_default_str();
    c_tau->add_option("--grid", tau_grid)->check(CLI::Range(64, 65536))->capture_default_str();
    add_output_options(c_tau, out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        int rc = 0;
        if (!app.get_subcommands().empty()) {
            out.manifest["config"] = resolved_config(*app.get_subcommands().front());
            out.manifest["config"]["eps"] = policy.eps;
            out.manifest["config"]["max_terms"] = policy.max_terms;
        }
        if (app.got_subcommand(c_theta)) {
            policy.validate();
            rc = run_theta_check(out, policy);
            out.finish("theta-check");
        } else if (app.got_subcommand(c_info)) {
            lattice::LatticeParams params = lattice::LatticeParams::hexagonal();
            if (info_hexa) {
                params = lattice::LatticeParams::hexagonal();
            } else if (info_rect_gamma > 0.0) {
                params = lattice::LatticeParams::rectangular(info_rect_gamma);
            } else if (info_gamma > 0.0) {
                params = lattice::LatticeParams{info_gamma, cplx(info_tau_re, info_tau_im),
                                                info_N};
                params.validate();
            } else {
                throw CLI::ValidationError("lattice-info",
                                           "one of --hexa, --rect-gamma, --gamma is required");
            }
            out.manifest["params"] = {{"gamma", params.gamma},
                                      {"tau", {params.tau.real(), params.tau.imag()}},
                                      {"N", params.N}};
            rc = run_lattice_info(out, params, info_quad);
            out.finish("lattice-info");
        } else if (app.got_subcommand(c_stat)) {
            const auto conv = stat_rect_gamma > 0.0 ? fock::BasisConvention::rect(stat_rect_gamma)
                                                    : fock::BasisConvention::hexa();
            (void)stat_hexa;
            rc = run_stationary(out, conv, stat_c, stat_k);
            out.finish("stationary");
        } else if (app.got_subcommand(c_sim)) {
            dynamics::StepControl control{sim_rtol, sim_atol, 1e-3};
            if (sim_cell) {
                lattice::LatticeParams params =
                    sim_hexa ? lattice::LatticeParams::hexagonal()
                             : lattice::LatticeParams::rectangular(
                                   sim_rect_gamma > 0.0 ? sim_rect_gamma : std::sqrt(pi));
                if (sim_N != params.N) {
                    params.N = sim_N;
                    params.tau = cplx(params.tau.real(),
                                      pi * sim_N / (params.gamma * params.gamma));
                    params.validate();
                }
                std::vector<cplx> lambdas;
                if (!sim_lambdas.empty()) {
                    std::stringstream ss(sim_lambdas);
                    std::string item;
                    while (std::getline(ss, item, ';')) {
                        double re, im;
                        if (std::sscanf(item.c_str(), "%lf,%lf", &re, &im) != 2)
                            throw CLI::ValidationError("--lambdas", "expected re,im;re,im;...");
                        lambdas.emplace_back(re, im);
                    }
                } else {
                    lambdas.assign(std::size_t(params.N), 0.0);
                    lambdas[0] = sim_c;
                }
                if (int(lambdas.size()) != params.N)
                    throw CLI::ValidationError("--lambdas", "needs exactly N amplitudes");
                const dynamics::CellCouplings couplings(params);
                const dynamics::CellState state0{lambdas, params};
                const auto traj = dynamics::integrate(state0, couplings, sim_T, control);
                out.write_table("trajectory",
                                dynamics::trajectory_csv(traj, state0, couplings));
                out.manifest["steps"] = traj.times.size();
            } else {
                const auto conv = sim_hexa
                                      ? fock::BasisConvention::hexa()
                                      : fock::BasisConvention::rect(
                                            sim_rect_gamma > 0.0 ? sim_rect_gamma : 2.0);
                fock::CoeffState state0 = fock::CoeffState::zeros(sim_kmin, sim_kmax, conv);
                if (!sim_coeffs_file.empty()) {
                    std::ifstream in(sim_coeffs_file);
                    if (!in) throw CLI::ValidationError("--coeffs", "cannot open file");
                    std::stringstream ss;
                    ss << in.rdbuf();
                    state0 = fock::coeff_state_from_json(ss.str());
                } else if (!sim_modes.empty()) {
                    state0 = parse_modes(sim_modes, sim_kmin, sim_kmax, conv);
                } else {
                    throw CLI::ValidationError("simulate", "--modes or --coeffs required");
                }
                const auto traj = dynamics::integrate(state0, sim_T, control);
                out.write_table("trajectory", dynamics::trajectory_csv(traj, state0));
                out.manifest["steps"] = traj.times.size();
                out.manifest["truncation_flagged"] = traj.truncation_flagged;
            }
            out.finish("simulate");
        } else if (app.got_subcommand(c_spec)) {
            if (!spec_hexa && !(spec_rect_gamma > 0.0))
                throw CLI::ValidationError("spectrum", "--hexa or --rect-gamma required");
            rc = run_spectrum(out,
                              spec_hexa ? linstab::SymbolTable::Kind::hexa
                                        : linstab::SymbolTable::Kind::rect,
                              spec_hexa ? 0.0 : spec_rect_gamma, spec_grid);
            out.finish("spectrum");
        } else if (app.got_subcommand(c_scan)) {
            if (!(scan_from > 0.0) || !(scan_to > scan_from))
                throw CLI::ValidationError("scan-gamma", "need 0 < from < to");
            rc = run_scan_gamma(out, scan_from, scan_to, scan_grid);
            out.finish("scan-gamma");
        } else if (app.got_subcommand(c_decay)) {
            rc = run_decay(out, decay_tmin, decay_tmax, decay_ntimes, decay_grid, decay_kwidth,
                           decay_sigma);
            out.finish("decay");
        } else if (app.got_subcommand(c_growth)) {
            rc = run_growth(out, growth_theta, growth_k0, growth_tmax, growth_grid);
            out.finish("growth");
        } else if (app.got_subcommand(c_inst)) {
            rc = run_instability(out, inst_gamma, inst_tmax);
            out.finish("instability");
        } else if (app.got_subcommand(c_mom)) {
            rc = run_moments(out, mom_T, mom_ntimes);
            out.finish("moments");
        } else if (app.got_subcommand(c_mu)) {
            rc = run_mu_profile(out, mu_grid);
            out.finish("mu-profile");
        } else if (app.got_subcommand(c_tau)) {
            std::vector<double> tau1s(tau_n);
            for (int i = 0; i < tau_n; ++i)
                tau1s[std::size_t(i)] = tau_from + (tau_to - tau_from) * double(i) / (tau_n - 1);
            const auto pts = linstab::general_tau_scan(tau_gamma, tau1s, tau_grid);
            std::string csv = "tau1,max_growth\n";
            for (const auto& p : pts) csv += fmt(p.tau1) + ',' + fmt(p.max_growth) + '\n';
            out.write_table("tau_scan", csv);
            out.manifest["experimental"] = true;
            std::cout << "experimental scan written (" << pts.size() << " points)\n";
            out.finish("tau-scan");
        }
        return rc;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << e.what() << "\n";  // leads with the error name
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    }
}
