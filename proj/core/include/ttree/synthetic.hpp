#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ttree/data.hpp"

namespace ttree {

/// Half-open interval [lo, hi); the closed-left convention decides region
/// membership on boundaries.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const { return v >= lo && v < hi; }
};

/// Axis-aligned region with its planted trigger and effect.
struct Subgroup {
    std::vector<Interval> region;   // one interval per feature
    double trigger = 0.0;           // theta*
    double effect = 0.0;            // tau*

    bool contains(const std::vector<double>& features) const;
};

/// Ground-truth generative model: subgroup regions must partition the unit
/// cube, treatment is uniform on [treatment_min, treatment_max] independent
/// of features, and the outcome is
///   baseline(x) + effect * 1[t >= trigger(region of x)] + Normal(0, noise_sd).
struct PlantedModel {
    std::size_t dimension = 0;
    std::vector<Subgroup> subgroups;
    double baseline_intercept = 0.0;
    std::vector<double> baseline_coefs;   // empty means all-zero
    double noise_sd = 0.0;
    double treatment_min = 0.0;
    double treatment_max = 1.0;
    std::uint64_t seed = 0;

    double baseline(const std::vector<double>& features) const;

    /// Structural checks plus a deterministic Monte Carlo sweep verifying the
    /// regions cover the unit cube without overlap. Throws ValidationError.
    void validate() const;
};

struct OracleEffect {
    double effect = 0.0;
    double trigger = 0.0;
};

/// The planted (effect, trigger) of the region containing `features`.
OracleEffect oracle_ice(const PlantedModel& model, const std::vector<double>& features);

/// Draw n samples from the model; deterministic under model.seed. The
/// true-effect column carries each sample's planted effect.
Dataset generate(const PlantedModel& model, std::size_t n);

/// Two subgroups split on feature 0 at 0.5 with opposite-signed effects and
/// distinct triggers: (theta*, tau*) = (3.0, +1.0) below, (7.0, -1.0) above;
/// treatment uniform on [0, 10], zero baseline, noise_sd 0.1.
PlantedModel default_benchmark_model(std::uint64_t seed);

} // namespace ttree
