#ifndef LLL_COMMON_HPP
#define LLL_COMMON_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lll {

using cplx = std::complex<double>;
using namespace std::complex_literals;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Base class for all numeric failures raised by the library. The CLI maps
/// these to exit code 1 with the error name on stderr.
class numeric_error : public std::runtime_error {
public:
    numeric_error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define LLL_DEFINE_ERROR(tag)                                          \
    class tag : public numeric_error {                                 \
    public:                                                            \
        explicit tag(const std::string& what) : numeric_error(#tag, what) {} \
    }

LLL_DEFINE_ERROR(TailNotMet);
LLL_DEFINE_ERROR(ConstraintViolated);
LLL_DEFINE_ERROR(ZeroCountMismatch);
LLL_DEFINE_ERROR(ProbeAtZero);
LLL_DEFINE_ERROR(NotPeriodic);
LLL_DEFINE_ERROR(StepFailure);
LLL_DEFINE_ERROR(WindowOverflow);
LLL_DEFINE_ERROR(RealityViolated);
LLL_DEFINE_ERROR(NotAdmissible);
LLL_DEFINE_ERROR(NoTransition);

#undef LLL_DEFINE_ERROR

/// Stopping rule shared by every lattice/theta series in the library.
/// Summation stops once the analytic bound on the next term drops below
/// eps; if max_terms is reached first the evaluation throws TailNotMet.
struct TruncationPolicy {
    double eps = 1e-14;
    int max_terms = 512;

    void validate() const {
        if (!(eps > 0.0)) throw std::invalid_argument("TruncationPolicy: eps must be > 0");
        if (max_terms < 1) throw std::invalid_argument("TruncationPolicy: max_terms must be >= 1");
    }
};

/// Number of worker threads for grid-parallel loops. Reads LLL_LAB_THREADS
/// once; defaults to the hardware concurrency.
unsigned worker_threads();

/// Runs fn(i) for i in [0, n). Each index must write only to its own output
/// slot so the result does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lll

#endif
