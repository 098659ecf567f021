#pragma once

#include <cstddef>
#include <string>

// Panel-evaluation kernels: the inner loops that reduce a shock panel to an
// expected utility or expected profit for one candidate decision. A scalar
// reference kernel defines the semantics; an AVX2+FMA variant implements the
// same math four draws at a time and is selected at runtime when the CPU
// supports it. The two are equivalence-tested, not bit-identical: the vector
// exp is a polynomial (~1-2 ulp vs libm) and partial-sum order differs.
namespace fisim {

enum class KernelKind {
    automatic,  // avx2 when the CPU has AVX2+FMA, else scalar
    scalar,
    avx2,
};

// Flattened view of one evaluation: precomputed decision-dependent scalars
// plus pointers into the panel columns. `index` aliases theta or omega.
struct PanelWorkload {
    const double* theta = nullptr;
    const double* omega = nullptr;
    const double* index = nullptr;
    std::size_t n = 0;

    double mean_output = 0.0;   // f(x)
    double risk_output = 0.0;   // h(x); 0 in standard mode
    double cost = 0.0;          // total input cost
    double biomass_mean = 1.0;

    double payout = 0.0;        // absolute indemnity
    double premium = 0.0;
    double trigger = 0.0;

    double risk_aversion = 1.0;
};

bool avx2_available();
KernelKind resolve_kernel(KernelKind requested);  // automatic -> concrete
const char* kernel_name(KernelKind kind);
KernelKind parse_kernel(const std::string& name);  // "auto"|"scalar"|"avx2"

// Mean over the panel of 1 - exp(-a * wealth_i), wealth_i = f*(B+theta_i)
// + h*omega_i - cost + transfer_i, with the exponent clamp documented in
// economics.hpp. Throws std::invalid_argument on an empty or ill-formed
// workload, or if the requested kernel is unavailable on this machine.
double panel_expected_utility(const PanelWorkload& w, KernelKind kind = KernelKind::automatic);

// Mean over the panel of wealth_i (profit plus net transfer). Scalar only;
// this runs once per solve, not in the optimizer loop.
double panel_mean_profit(const PanelWorkload& w);

namespace detail {

double panel_eu_scalar(const PanelWorkload& w);
#if defined(FISIM_HAVE_AVX2)
double panel_eu_avx2(const PanelWorkload& w);
#endif

// Range-reduced polynomial exp used by the vector kernel (and its scalar
// tail), exposed for accuracy tests. Valid on the clamped utility domain.
double poly_exp(double x);

} // namespace detail

} // namespace fisim
