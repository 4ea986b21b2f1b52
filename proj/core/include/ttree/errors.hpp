#pragma once

#include <stdexcept>
#include <string>

namespace ttree {

/// Invalid configuration, schema, or input contract violation. CLI maps
/// this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dataset-level problem found at ingestion (bad CSV cell, missing column).
struct DataError : ValidationError {
    explicit DataError(const std::string& msg) : ValidationError(msg) {}
};

/// A treatment or control group is empty or too small for the requested
/// statistic. Candidate-search code treats this as "candidate invalid"
/// without throwing; the exception form is for direct API calls.
struct DegenerateGroup : std::runtime_error {
    explicit DegenerateGroup(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training was asked to run on an empty dataset.
struct EmptyData : ValidationError {
    explicit EmptyData(const std::string& msg) : ValidationError(msg) {}
};

/// Training data has a single treatment value (trigger mode) or a single
/// treatment arm (binary mode); no tree can be learned.
struct NoVariation : ValidationError {
    explicit NoVariation(const std::string& msg) : ValidationError(msg) {}
};

} // namespace ttree
