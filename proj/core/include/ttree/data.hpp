#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttree/errors.hpp"

namespace ttree {

enum class FeatureKind { Continuous, Discrete };

/// One unit: features, treatment amount, observed outcome, and (for
/// synthetic benchmarks) the ground-truth individual effect.
struct Sample {
    std::vector<double> features;
    double treatment = 0.0;
    double outcome = 0.0;
    std::optional<double> true_effect;
};

struct Dataset {
    std::vector<Sample> samples;
    std::size_t dimension = 0;
    std::vector<std::string> feature_names;           // size == dimension
    std::vector<FeatureKind> feature_kinds;           // size == dimension

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    double feature(std::size_t row, std::size_t col) const {
        return samples[row].features[col];
    }

    /// Checks per-sample invariants: dimension match, finite values. Throws
    /// DataError naming the offending row.
    void validate() const;

    /// True when every sample carries a ground-truth effect.
    bool has_true_effects() const;
};

/// Default metadata (x0..x{d-1}, all continuous) for programmatic datasets.
Dataset make_dataset(std::size_t dimension);

/// Rows of `data` selected by `indices`, order preserved.
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

/// Train / validation / estimation / test partition of a source dataset.
/// Parts are disjoint by source row and their union is the whole dataset;
/// empty parts are represented as empty datasets.
struct DataSplit {
    Dataset train;
    Dataset validation;
    Dataset estimation;
    Dataset test;
    std::uint64_t seed = 0;
    double validation_fraction = 0.0;

    std::size_t total_size() const {
        return train.size() + validation.size() + estimation.size() + test.size();
    }
};

/// Uniform random split. Part sizes are floor(fraction * N); leftover rows
/// go to train. Bit-reproducible for a given (data, fractions, seed).
DataSplit split_dataset(const Dataset& data, double validation_fraction,
                        double estimation_fraction, double test_fraction,
                        std::uint64_t seed);

/// A node's slice of the DataSplit: index lists into each part. Children of
/// a split partition the parent's lists exactly.
struct NodeSample {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> est_idx;

    static NodeSample whole(const DataSplit& split);
};

} // namespace ttree
