#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Zero-mean normal shocks driving production: a biomass measurement error
// (theta) and an extraction shock (omega). Panels of draws are sampled once
// per decision problem and reused for every candidate decision, so optimizer
// comparisons see common random numbers.
namespace fisim {

enum class ShockVar { theta, omega };
enum class Dependence { independent, perfectly_correlated };
enum class ShockFamily { normal };
enum class Side { below, above };

struct ShockSpec {
    double sigma_theta = 0.0;
    double sigma_omega = 0.0;
    Dependence dependence = Dependence::independent;
    ShockFamily family = ShockFamily::normal;

    double sigma(ShockVar v) const {
        return v == ShockVar::theta ? sigma_theta : sigma_omega;
    }

    // Throws std::invalid_argument on negative sigmas or on a perfectly
    // correlated spec that cannot be realized (sigma_omega = 0 while
    // sigma_theta > 0: theta is defined by scaling the omega draw).
    void validate() const;
};

// Sampled draws, stored column-wise so numeric kernels can stream them.
struct ShockPanel {
    std::vector<double> theta;
    std::vector<double> omega;
    std::uint64_t seed = 0;
    std::uint64_t spec_hash = 0;

    std::size_t size() const { return theta.size(); }
    const std::vector<double>& column(ShockVar v) const {
        return v == ShockVar::theta ? theta : omega;
    }
};

// Stable fingerprint of a spec (exact bit patterns of the sigmas plus the
// enums). Panels record the hash of the spec they were sampled from, and
// consumers check it before mixing a panel with a different spec.
std::uint64_t shock_spec_hash(const ShockSpec& spec);

// Draws n pairs. Each variable consumes its own substream, seeded by mixing
// (seed, variable tag), and the inverse-CDF transform eats exactly one 53-bit
// uniform per draw. Consequences, both deliberate:
//   - changing sigma_omega (or the dependence mode) never changes the theta
//     column for a given seed;
//   - a panel of size n is a prefix of the panel of size m > n.
// Under perfectly_correlated both variables scale one underlying standard
// normal, so theta[i] == (sigma_theta / sigma_omega) * omega[i] exactly
// whenever sigma_omega > 0.
ShockPanel sample_shocks(const ShockSpec& spec, std::size_t n, std::uint64_t seed);

// Standard normal helpers (double precision; cdf via erfc keeps the left
// tail accurate, quantile is Wichura's AS241).
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

// P(v < value) for one shock variable. Throws if its sigma is zero.
double cdf_at(const ShockSpec& spec, ShockVar v, double value);

// E[v | v < trigger] (Side::below) or E[v | v > trigger] (Side::above) for a
// zero-mean normal with the variable's sigma. Throws if sigma is zero or the
// conditioning event has probability 0 or 1 at double precision.
double conditional_mean(const ShockSpec& spec, ShockVar v, Side side, double trigger);

// splitmix64-based mixing used for substream seeds and cell seeds; exposed
// so experiment code can derive per-cell seeds the same documented way.
std::uint64_t hash_mix(std::uint64_t state, std::uint64_t value);

} // namespace fisim
