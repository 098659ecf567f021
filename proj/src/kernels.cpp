#include "fisim/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fisim/economics.hpp"

namespace fisim {
namespace {

void check_workload(const PanelWorkload& w) {
    if (w.n == 0) throw std::invalid_argument("panel workload is empty");
    if (!w.theta || !w.omega || !w.index)
        throw std::invalid_argument("panel workload has null columns");
    if (!(w.risk_aversion > 0.0))
        throw std::invalid_argument("panel workload needs positive risk aversion");
}

} // namespace

bool avx2_available() {
#if defined(FISIM_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
    static const bool ok =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

KernelKind resolve_kernel(KernelKind requested) {
    if (requested == KernelKind::automatic)
        return avx2_available() ? KernelKind::avx2 : KernelKind::scalar;
    return requested;
}

const char* kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::automatic: return "auto";
        case KernelKind::scalar: return "scalar";
        case KernelKind::avx2: return "avx2";
    }
    return "unknown";
}

KernelKind parse_kernel(const std::string& name) {
    if (name == "auto") return KernelKind::automatic;
    if (name == "scalar") return KernelKind::scalar;
    if (name == "avx2") return KernelKind::avx2;
    throw std::invalid_argument("unknown kernel '" + name + "' (expected auto|scalar|avx2)");
}

double panel_expected_utility(const PanelWorkload& w, KernelKind kind) {
    check_workload(w);
    switch (resolve_kernel(kind)) {
        case KernelKind::scalar:
            return detail::panel_eu_scalar(w);
        case KernelKind::avx2:
#if defined(FISIM_HAVE_AVX2)
            if (avx2_available()) return detail::panel_eu_avx2(w);
#endif
            throw std::invalid_argument("avx2 kernel requested but not available on this machine");
        default:
            throw std::invalid_argument("unresolved kernel kind");
    }
}

double panel_mean_profit(const PanelWorkload& w) {
    check_workload(w);
    const double bad = w.payout - w.premium;
    const double good = -w.premium;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        const double transfer = w.index[i] < w.trigger ? bad : good;
        acc += w.mean_output * (w.biomass_mean + w.theta[i]) +
               w.risk_output * w.omega[i] - w.cost + transfer;
    }
    return acc / static_cast<double>(w.n);
}

namespace detail {

double panel_eu_scalar(const PanelWorkload& w) {
    const double a = w.risk_aversion;
    const double bad = w.payout - w.premium;
    const double good = -w.premium;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        const double transfer = w.index[i] < w.trigger ? bad : good;
        const double wealth = w.mean_output * (w.biomass_mean + w.theta[i]) +
                              w.risk_output * w.omega[i] - w.cost + transfer;
        double z = -a * wealth;
        z = z < utility_exp_arg_min ? utility_exp_arg_min
                                    : (z > utility_exp_arg_max ? utility_exp_arg_max : z);
        acc += 1.0 - std::exp(z);
    }
    return acc / static_cast<double>(w.n);
}

// exp(x) = 2^n * e^r with n = round(x log2 e) and |r| <= ln2 / 2, e^r from a
// rational polynomial in r^2. Matches libm to ~1-2 ulp on the clamped
// utility domain; used by the vector kernel and its remainder lanes so the
// whole AVX2 path is one consistent approximation.
double poly_exp(double x) {
    constexpr double log2e = 1.4426950408889634073599;
    constexpr double ln2_hi = 6.93145751953125e-1;
    constexpr double ln2_lo = 1.42860682030941723212e-6;
    constexpr double p0 = 1.26177193074810590878e-4;
    constexpr double p1 = 3.02994407707441961300e-2;
    constexpr double p2 = 9.99999999999999999910e-1;
    constexpr double q0 = 3.00198505138664455042e-6;
    constexpr double q1 = 2.52448340349684104192e-3;
    constexpr double q2 = 2.27265548208155028766e-1;
    constexpr double q3 = 2.00000000000000000005e0;

    const double n = std::nearbyint(x * log2e);
    double r = x - n * ln2_hi;
    r -= n * ln2_lo;
    const double r2 = r * r;
    const double p = r * ((p0 * r2 + p1) * r2 + p2);
    const double q = ((q0 * r2 + q1) * r2 + q2) * r2 + q3;
    const double e = 1.0 + 2.0 * p / (q - p);
    return std::ldexp(e, static_cast<int>(n));
}

} // namespace detail
} // namespace fisim
