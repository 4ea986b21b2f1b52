#include "ttree/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttree/rng.hpp"

namespace ttree {

void Dataset::validate() const {
    if (feature_names.size() != dimension || feature_kinds.size() != dimension) {
        throw DataError("dataset metadata does not match dimension " + std::to_string(dimension));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (s.features.size() != dimension) {
            throw DataError("row " + std::to_string(i) + ": expected " + std::to_string(dimension) +
                            " features, got " + std::to_string(s.features.size()));
        }
        for (std::size_t j = 0; j < dimension; ++j) {
            if (!std::isfinite(s.features[j])) {
                throw DataError("row " + std::to_string(i) + ", feature " + std::to_string(j) +
                                ": non-finite value");
            }
        }
        if (!std::isfinite(s.treatment) || !std::isfinite(s.outcome)) {
            throw DataError("row " + std::to_string(i) + ": non-finite treatment or outcome");
        }
    }
}

bool Dataset::has_true_effects() const {
    if (samples.empty()) return false;
    return std::all_of(samples.begin(), samples.end(),
                       [](const Sample& s) { return s.true_effect.has_value(); });
}

Dataset make_dataset(std::size_t dimension) {
    Dataset d;
    d.dimension = dimension;
    d.feature_names.reserve(dimension);
    for (std::size_t j = 0; j < dimension; ++j) {
        d.feature_names.push_back("x" + std::to_string(j));
    }
    d.feature_kinds.assign(dimension, FeatureKind::Continuous);
    return d;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.dimension = data.dimension;
    out.feature_names = data.feature_names;
    out.feature_kinds = data.feature_kinds;
    out.samples.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= data.samples.size()) {
            throw ValidationError("subset index " + std::to_string(idx) + " out of range (N=" +
                                  std::to_string(data.samples.size()) + ")");
        }
        out.samples.push_back(data.samples[idx]);
    }
    return out;
}

DataSplit split_dataset(const Dataset& data, double validation_fraction,
                        double estimation_fraction, double test_fraction,
                        std::uint64_t seed) {
    if (data.empty()) throw EmptyData("split_dataset: empty dataset");
    const double fracs[] = {validation_fraction, estimation_fraction, test_fraction};
    double sum = 0.0;
    for (double f : fracs) {
        if (f < 0.0 || !std::isfinite(f)) {
            throw ValidationError("split_dataset: fractions must be finite and nonnegative");
        }
        sum += f;
    }
    if (sum >= 1.0) throw ValidationError("split_dataset: fractions must sum to < 1");

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(substream(seed, "split"));
    rng.shuffle(order);

    const auto part = [](double frac, std::size_t total) {
        return static_cast<std::size_t>(std::floor(frac * static_cast<double>(total)));
    };
    const std::size_t n_val = part(validation_fraction, n);
    const std::size_t n_est = part(estimation_fraction, n);
    const std::size_t n_test = part(test_fraction, n);

    auto take = [&](std::size_t begin, std::size_t count) {
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(begin + count));
        std::sort(idx.begin(), idx.end());   // parts keep source row order
        return subset(data, idx);
    };

    DataSplit split;
    split.validation = take(0, n_val);
    split.estimation = take(n_val, n_est);
    split.test = take(n_val + n_est, n_test);
    split.train = take(n_val + n_est + n_test, n - n_val - n_est - n_test);
    split.seed = seed;
    split.validation_fraction = validation_fraction;
    return split;
}

NodeSample NodeSample::whole(const DataSplit& split) {
    NodeSample node;
    node.train_idx.resize(split.train.size());
    std::iota(node.train_idx.begin(), node.train_idx.end(), 0);
    node.val_idx.resize(split.validation.size());
    std::iota(node.val_idx.begin(), node.val_idx.end(), 0);
    node.est_idx.resize(split.estimation.size());
    std::iota(node.est_idx.begin(), node.est_idx.end(), 0);
    return node;
}

} // namespace ttree
