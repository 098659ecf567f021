// AVX2+FMA variant of the expected-utility panel reduction. Compiled only on
// x86-64 (see src/CMakeLists.txt); callers go through panel_expected_utility,
// which dispatches here when the CPU supports it.
#include "fisim/kernels.hpp"

#if defined(FISIM_HAVE_AVX2)

#include <immintrin.h>

#include "fisim/economics.hpp"

namespace fisim::detail {
namespace {

// Vector form of poly_exp (kernels.cpp): round-to-nearest range reduction,
// rational polynomial in r^2, exponent reassembled through the bit pattern.
// Caller guarantees x within the clamped utility domain, so n stays far from
// both exponent-field limits and no subnormal handling is needed.
inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    const __m256d r2 = _mm256_mul_pd(r, r);
    const __m256d p = _mm256_mul_pd(
        r, _mm256_fmadd_pd(_mm256_fmadd_pd(p0, r2, p1), r2, p2));
    const __m256d q = _mm256_fmadd_pd(
        _mm256_fmadd_pd(_mm256_fmadd_pd(q0, r2, q1), r2, q2), r2, q3);
    const __m256d e =
        _mm256_fmadd_pd(two, _mm256_div_pd(p, _mm256_sub_pd(q, p)), one);

    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i pow2 =
        _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
}

} // namespace

double panel_eu_avx2(const PanelWorkload& w) {
    const __m256d f = _mm256_set1_pd(w.mean_output);
    const __m256d h = _mm256_set1_pd(w.risk_output);
    const __m256d biomass = _mm256_set1_pd(w.biomass_mean);
    const __m256d neg_cost = _mm256_set1_pd(-w.cost);
    const __m256d bad = _mm256_set1_pd(w.payout - w.premium);
    const __m256d good = _mm256_set1_pd(-w.premium);
    const __m256d trigger = _mm256_set1_pd(w.trigger);
    const __m256d neg_a = _mm256_set1_pd(-w.risk_aversion);
    const __m256d zmin = _mm256_set1_pd(utility_exp_arg_min);
    const __m256d zmax = _mm256_set1_pd(utility_exp_arg_max);
    const __m256d one = _mm256_set1_pd(1.0);

    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= w.n; i += 4) {
        const __m256d th = _mm256_loadu_pd(w.theta + i);
        const __m256d om = _mm256_loadu_pd(w.omega + i);
        const __m256d ix = _mm256_loadu_pd(w.index + i);

        const __m256d in_bad = _mm256_cmp_pd(ix, trigger, _CMP_LT_OQ);
        const __m256d transfer = _mm256_blendv_pd(good, bad, in_bad);
        __m256d wealth = _mm256_fmadd_pd(h, om, _mm256_add_pd(neg_cost, transfer));
        wealth = _mm256_fmadd_pd(f, _mm256_add_pd(biomass, th), wealth);

        __m256d z = _mm256_mul_pd(neg_a, wealth);
        z = _mm256_min_pd(_mm256_max_pd(z, zmin), zmax);
        acc = _mm256_add_pd(acc, _mm256_sub_pd(one, exp4(z)));
    }

    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);

    const double a = w.risk_aversion;
    const double bad_s = w.payout - w.premium;
    const double good_s = -w.premium;
    for (; i < w.n; ++i) {
        const double transfer = w.index[i] < w.trigger ? bad_s : good_s;
        const double wealth = w.mean_output * (w.biomass_mean + w.theta[i]) +
                              w.risk_output * w.omega[i] - w.cost + transfer;
        double z = -a * wealth;
        z = z < utility_exp_arg_min ? utility_exp_arg_min
                                    : (z > utility_exp_arg_max ? utility_exp_arg_max : z);
        sum += 1.0 - poly_exp(z);
    }
    return sum / static_cast<double>(w.n);
}

} // namespace fisim::detail

#endif // FISIM_HAVE_AVX2
