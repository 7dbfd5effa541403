#include "lll/specfun.hpp"

#include <cmath>
#include <thread>

namespace lll {

namespace {
unsigned resolve_threads() {
    if (const char* env = std::getenv("LLL_LAB_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}
}  // namespace

unsigned worker_threads() {
    static const unsigned n = resolve_threads();
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned nt = std::min<std::size_t>(worker_threads(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace lll

namespace lll::specfun {

cplx theta(cplx z, cplx tau, const TruncationPolicy& policy) {
    policy.validate();
    const double tau2 = tau.imag();
    if (!(tau2 > 0.0)) throw std::invalid_argument("theta: Im(tau) must be > 0");

    // reduce z into the fundamental domain through the quasi-periodicity laws
    //   theta(w + m + n tau) = (-1)^{m+n} exp(-i pi tau n^2 - 2 i pi n w) theta(w);
    // this keeps the series free of large cancelling terms for any Im z
    const long nsh = std::lround(z.imag() / tau2);
    cplx w = z - double(nsh) * tau;
    const long msh = std::lround(w.real());
    w -= double(msh);
    cplx multiplier = 1.0;
    if (nsh != 0 || msh != 0) {
        multiplier = std::exp(cplx(0.0, -pi) * tau * double(nsh) * double(nsh) -
                              cplx(0.0, 2.0 * pi * double(nsh)) * w);
        if ((msh + nsh) % 2 != 0) multiplier = -multiplier;
    }
    z = w;

    const double ay = std::abs(z.imag());
    const cplx ipitau = cplx(0.0, pi) * tau;
    const cplx ipiz = cplx(0.0, pi) * z;

    cplx sum = 0.0;
    for (int m = 0;; ++m) {
        if (m >= policy.max_terms)
            throw TailNotMet("theta series did not reach eps=" + std::to_string(policy.eps) +
                             " within " + std::to_string(policy.max_terms) + " terms");
        // pair n = m and n = -m-1 shares the (m+1/2)^2 Gaussian factor
        const double half = m + 0.5;
        const cplx gauss = std::exp(ipitau * (half * half));
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        const cplx osc_p = std::exp(ipiz * double(2 * m + 1));
        sum += sign * gauss * (osc_p - 1.0 / osc_p);

        const double next_half = m + 1.5;
        const double bound =
            std::exp(-pi * tau2 * next_half * next_half + 2.0 * pi * ay * double(2 * m + 3));
        const double this_bound =
            std::exp(-pi * tau2 * half * half + 2.0 * pi * ay * double(2 * m + 1));
        if (bound < policy.eps && bound <= this_bound) break;
    }
    return multiplier * cplx(0.0, -1.0) * sum;
}

cplx theta_quasi_period(cplx z, cplx tau) {
    return -std::exp(cplx(0.0, -pi) * tau) * std::exp(cplx(0.0, -2.0 * pi) * z);
}

double gauss_sum(int order, double gamma, SumParity parity, const TruncationPolicy& policy) {
    policy.validate();
    if (order < 0) throw std::invalid_argument("gauss_sum: order must be >= 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("gauss_sum: gamma must be > 0");

    const double c = pi * pi / (gamma * gamma);
    // +-q pairs cancel identically for odd order
    if (order % 2 == 1) return 0.0;

    double sum = 0.0;
    if (parity == SumParity::all && order == 0) sum += 1.0;  // q = 0 term
    const int step = (parity == SumParity::odd) ? 2 : 1;
    int terms = 0;
    for (int q = 1;; q += step) {
        if (++terms > policy.max_terms)
            throw TailNotMet("gauss_sum tail not below eps within max_terms");
        const double t = 2.0 * std::pow(double(q), double(order)) * std::exp(-c * double(q) * double(q));
        sum += t;
        const double qn = q + step;
        const double bound = 2.0 * std::pow(qn, double(order)) * std::exp(-c * qn * qn);
        if (bound < policy.eps && bound <= t) break;
    }
    return sum;
}

namespace {

// Shared engine for ell/h/g: 2 sum_k (2 pi k)^d q^{k^2} trig(2 pi k xi) over the
// requested index class, plus the k = 0 constant for d = 0 when included.
enum class IndexClass { all, odd, even };

double cosine_series(double xi, double gamma, int deriv, IndexClass cls,
                     const TruncationPolicy& policy) {
    policy.validate();
    if (deriv < 0 || deriv > 4)
        throw std::invalid_argument("symbol series: deriv must be in 0..4");
    if (!(gamma > 0.0)) throw std::invalid_argument("symbol series: gamma must be > 0");

    const double c = pi * pi / (gamma * gamma);
    double sum = 0.0;
    if (deriv == 0 && cls != IndexClass::odd) sum += 1.0;

    const int k0 = (cls == IndexClass::even) ? 2 : 1;
    const int step = (cls == IndexClass::all) ? 1 : 2;
    int terms = 0;
    for (int k = k0;; k += step) {
        if (++terms > policy.max_terms)
            throw TailNotMet("symbol series tail not below eps within max_terms");
        const double w = 2.0 * pi * k;
        const double arg = w * xi;
        double trig;
        switch (deriv % 4) {
            case 0: trig = std::cos(arg); break;
            case 1: trig = -std::sin(arg); break;
            case 2: trig = -std::cos(arg); break;
            default: trig = std::sin(arg); break;
        }
        const double amp = 2.0 * std::pow(w, double(deriv)) * std::exp(-c * double(k) * double(k));
        sum += amp * trig;
        const double kn = k + step;
        const double bound = 2.0 * std::pow(2.0 * pi * kn, double(deriv)) * std::exp(-c * kn * kn);
        if (bound < policy.eps && bound <= amp) break;
    }
    return sum;
}

double delta_series(double xi, double gamma, IndexClass cls, const TruncationPolicy& policy) {
    // ell(xi) - ell(0) = sum 2 q^{k^2} (cos(2 pi k xi) - 1) = -4 sum q^{k^2} sin^2(pi k xi)
    policy.validate();
    const double c = pi * pi / (gamma * gamma);
    double sum = 0.0;
    const int k0 = (cls == IndexClass::even) ? 2 : 1;
    const int step = (cls == IndexClass::all) ? 1 : 2;
    int terms = 0;
    for (int k = k0;; k += step) {
        if (++terms > policy.max_terms)
            throw TailNotMet("symbol delta series tail not below eps within max_terms");
        const double s = std::sin(pi * k * xi);
        const double amp = 4.0 * std::exp(-c * double(k) * double(k));
        sum -= amp * s * s;
        const double kn = k + step;
        const double bound = 4.0 * std::exp(-c * kn * kn);
        if (bound < policy.eps && bound <= amp) break;
    }
    return sum;
}

}  // namespace

double symbol_ell(double xi, double gamma, int deriv, const TruncationPolicy& policy) {
    return cosine_series(xi, gamma, deriv, IndexClass::all, policy);
}

double symbol_h(double xi, double gamma, int deriv, const TruncationPolicy& policy) {
    return cosine_series(xi, gamma, deriv, IndexClass::odd, policy);
}

double symbol_g(double xi, double gamma, int deriv, const TruncationPolicy& policy) {
    return cosine_series(xi, gamma, deriv, IndexClass::even, policy);
}

double symbol_ell_delta(double xi, double gamma, const TruncationPolicy& policy) {
    return delta_series(xi, gamma, IndexClass::all, policy);
}

double symbol_h_delta(double xi, double gamma, const TruncationPolicy& policy) {
    return delta_series(xi, gamma, IndexClass::odd, policy);
}

double poisson_residual(double alpha, cplx z, const TruncationPolicy& policy) {
    policy.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("poisson_residual: alpha must be > 0");

    // left side: sum_n exp(-alpha (z+n)^2)
    cplx lhs = std::exp(-alpha * z * z);
    {
        int terms = 0;
        for (int n = 1;; ++n) {
            if (++terms > policy.max_terms)
                throw TailNotMet("poisson_residual: direct sum tail not met");
            const cplx zp = z + double(n), zm = z - double(n);
            const cplx tp = std::exp(-alpha * zp * zp), tm = std::exp(-alpha * zm * zm);
            lhs += tp + tm;
            const double reach = double(n + 1) - std::abs(z.real());
            if (reach <= 0.0) continue;
            const double bound =
                2.0 * std::exp(-alpha * (reach * reach - z.imag() * z.imag()));
            if (bound < policy.eps) break;
        }
    }

    // right side: sqrt(pi/alpha) sum_n exp(-pi^2 n^2/alpha + 2 i pi n z)
    cplx rhs = 1.0;
    {
        const double ay = std::abs(z.imag());
        int terms = 0;
        for (int n = 1;; ++n) {
            if (++terms > policy.max_terms)
                throw TailNotMet("poisson_residual: dual sum tail not met");
            const double g = std::exp(-pi * pi * double(n) * double(n) / alpha);
            const cplx osc = std::exp(cplx(0.0, 2.0 * pi * n) * z);
            rhs += g * (osc + 1.0 / osc);
            const double nn = n + 1;
            const double bound =
                2.0 * std::exp(-pi * pi * nn * nn / alpha + 2.0 * pi * nn * ay);
            const double cur = 2.0 * g * std::exp(2.0 * pi * n * ay);
            if (bound < policy.eps && bound <= cur) break;
        }
        rhs *= std::sqrt(pi / alpha);
    }
    return std::abs(lhs - rhs);
}

double gaussian_integral(double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("gaussian_integral: a must be > 0");
    return std::sqrt(pi / a) * std::exp(b * b / (4.0 * a));
}

}  // namespace lll::specfun
