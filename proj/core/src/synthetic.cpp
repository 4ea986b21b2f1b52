#include "ttree/synthetic.hpp"

#include <cmath>
#include <string>

#include "ttree/errors.hpp"
#include "ttree/rng.hpp"

namespace ttree {

bool Subgroup::contains(const std::vector<double>& features) const {
    for (std::size_t j = 0; j < region.size(); ++j)
        if (!region[j].contains(features[j])) return false;
    return true;
}

double PlantedModel::baseline(const std::vector<double>& features) const {
    double value = baseline_intercept;
    for (std::size_t j = 0; j < baseline_coefs.size(); ++j)
        value += baseline_coefs[j] * features[j];
    return value;
}

void PlantedModel::validate() const {
    if (dimension == 0) throw ValidationError("planted model needs dimension >= 1");
    if (subgroups.empty()) throw ValidationError("planted model needs at least one subgroup");
    if (!(treatment_min < treatment_max))
        throw ValidationError("treatment range must satisfy min < max");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
        throw ValidationError("noise_sd must be finite and non-negative");
    if (!baseline_coefs.empty() && baseline_coefs.size() != dimension)
        throw ValidationError("baseline coefficient count must match the dimension");

    for (std::size_t g = 0; g < subgroups.size(); ++g) {
        const Subgroup& group = subgroups[g];
        if (group.region.size() != dimension)
            throw ValidationError("subgroup " + std::to_string(g) +
                                  " region arity does not match the dimension");
        for (const Interval& iv : group.region)
            if (!(iv.lo < iv.hi))
                throw ValidationError("subgroup " + std::to_string(g) +
                                      " has an empty interval");
        if (!(group.trigger > treatment_min && group.trigger < treatment_max))
            throw ValidationError("subgroup " + std::to_string(g) +
                                  " trigger must lie strictly inside the treatment range");
        if (!std::isfinite(group.effect))
            throw ValidationError("subgroup " + std::to_string(g) + " effect must be finite");
    }

    // Deterministic Monte Carlo partition check over the unit cube: every
    // probe point must fall in exactly one region. The probe stream is fixed
    // (independent of model.seed) so validation is reproducible.
    Rng probe(substream(0x70617274u, "partition-check"));
    constexpr std::size_t kProbes = 2048;
    std::vector<double> point(dimension);
    for (std::size_t i = 0; i < kProbes; ++i) {
        for (double& coord : point) coord = probe.uniform01();
        std::size_t hits = 0;
        for (const Subgroup& group : subgroups)
            if (group.contains(point)) ++hits;
        if (hits != 1)
            throw ValidationError("subgroup regions do not partition the unit cube (probe hit " +
                                  std::to_string(hits) + " regions)");
    }
}

OracleEffect oracle_ice(const PlantedModel& model, const std::vector<double>& features) {
    if (features.size() != model.dimension)
        throw ValidationError("feature vector arity does not match the model dimension");
    for (const Subgroup& group : model.subgroups)
        if (group.contains(features)) return {group.effect, group.trigger};
    throw ValidationError("features fall outside every subgroup region");
}

Dataset generate(const PlantedModel& model, std::size_t n) {
    model.validate();
    if (n == 0) throw EmptyData("cannot generate an empty dataset");

    Dataset data = make_dataset(model.dimension);
    data.samples.reserve(n);
    Rng rng(substream(model.seed, "generate"));

    std::vector<double> features(model.dimension);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& coord : features) coord = rng.uniform01();
        const double treatment = rng.uniform(model.treatment_min, model.treatment_max);
        const double noise = rng.normal() * model.noise_sd;

        const OracleEffect truth = oracle_ice(model, features);
        Sample sample;
        sample.features = features;
        sample.treatment = treatment;
        sample.outcome = model.baseline(features) +
                         (treatment >= truth.trigger ? truth.effect : 0.0) + noise;
        sample.true_effect = truth.effect;
        data.samples.push_back(std::move(sample));
    }
    return data;
}

PlantedModel default_benchmark_model(std::uint64_t seed) {
    PlantedModel model;
    model.dimension = 2;
    model.treatment_min = 0.0;
    model.treatment_max = 10.0;
    model.noise_sd = 0.1;
    model.seed = seed;

    Subgroup low;
    low.region = {Interval{-std::numeric_limits<double>::infinity(), 0.5}, Interval{}};
    low.trigger = 3.0;
    low.effect = 1.0;

    Subgroup high;
    high.region = {Interval{0.5, std::numeric_limits<double>::infinity()}, Interval{}};
    high.trigger = 7.0;
    high.effect = -1.0;

    model.subgroups = {low, high};
    return model;
}

} // namespace ttree
