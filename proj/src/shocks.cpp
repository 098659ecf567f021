#include "fisim/shocks.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace fisim {
namespace {

constexpr double sqrt2 = 1.4142135623730950488;
constexpr double inv_sqrt_2pi = 0.39894228040143267794;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One uniform in (0, 1) per call, exactly one engine step: 53 random bits
// centered in the cell so 0 and 1 are unreachable.
double uniform53(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t double_bits(double v) {
    return std::bit_cast<std::uint64_t>(v);
}

} // namespace

std::uint64_t hash_mix(std::uint64_t state, std::uint64_t value) {
    return splitmix64(splitmix64(state) ^ value);
}

void ShockSpec::validate() const {
    if (sigma_theta < 0.0 || sigma_omega < 0.0)
        throw std::invalid_argument("shock sigmas must be nonnegative");
    if (!(std::isfinite(sigma_theta) && std::isfinite(sigma_omega)))
        throw std::invalid_argument("shock sigmas must be finite");
    if (dependence == Dependence::perfectly_correlated && sigma_omega == 0.0 &&
        sigma_theta > 0.0)
        throw std::invalid_argument(
            "perfectly correlated shocks need sigma_omega > 0 to carry the common draw");
}

std::uint64_t shock_spec_hash(const ShockSpec& spec) {
    std::uint64_t h = 0x66697369u;  // arbitrary nonzero start
    h = hash_mix(h, double_bits(spec.sigma_theta));
    h = hash_mix(h, double_bits(spec.sigma_omega));
    h = hash_mix(h, static_cast<std::uint64_t>(spec.dependence));
    h = hash_mix(h, static_cast<std::uint64_t>(spec.family));
    return h;
}

ShockPanel sample_shocks(const ShockSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("panel size must be positive");

    ShockPanel panel;
    panel.theta.resize(n);
    panel.omega.resize(n);
    panel.seed = seed;
    panel.spec_hash = shock_spec_hash(spec);

    // Substream tags are fixed: theta = 1, omega = 2. The correlated mode
    // consumes only the theta substream (one common draw per pair).
    std::mt19937_64 theta_rng(hash_mix(seed, 1));
    std::mt19937_64 omega_rng(hash_mix(seed, 2));

    if (spec.dependence == Dependence::independent) {
        for (std::size_t i = 0; i < n; ++i)
            panel.theta[i] = spec.sigma_theta * normal_quantile(uniform53(theta_rng));
        for (std::size_t i = 0; i < n; ++i)
            panel.omega[i] = spec.sigma_omega * normal_quantile(uniform53(omega_rng));
    } else {
        // theta is defined through omega so theta == ratio * omega holds
        // bit-for-bit (ratio == 1 exactly under equal sigmas).
        const double ratio =
            spec.sigma_omega > 0.0 ? spec.sigma_theta / spec.sigma_omega : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = normal_quantile(uniform53(theta_rng));
            panel.omega[i] = spec.sigma_omega * z;
            panel.theta[i] = ratio * panel.omega[i];
        }
    }
    return panel;
}

double normal_pdf(double z) { return inv_sqrt_2pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / sqrt2); }

// Wichura's AS241 rational approximations (double precision branch).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile needs p in (0, 1)");

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return q < 0.0 ? -x : x;
}

double cdf_at(const ShockSpec& spec, ShockVar v, double value) {
    spec.validate();
    const double sigma = spec.sigma(v);
    if (sigma <= 0.0)
        throw std::invalid_argument("cdf_at needs a positive sigma for the chosen variable");
    return normal_cdf(value / sigma);
}

double conditional_mean(const ShockSpec& spec, ShockVar v, Side side, double trigger) {
    spec.validate();
    const double sigma = spec.sigma(v);
    if (sigma <= 0.0)
        throw std::invalid_argument(
            "conditional_mean needs a positive sigma for the chosen variable");
    const double z = trigger / sigma;
    const double below_prob = normal_cdf(z);
    if (side == Side::below) {
        if (below_prob <= 0.0)
            throw std::domain_error("conditional_mean: P(v < trigger) is zero at double precision");
        return -sigma * normal_pdf(z) / below_prob;
    }
    const double above_prob = 1.0 - below_prob;
    if (above_prob <= 0.0)
        throw std::domain_error("conditional_mean: P(v > trigger) is zero at double precision");
    return sigma * normal_pdf(z) / above_prob;
}

} // namespace fisim
