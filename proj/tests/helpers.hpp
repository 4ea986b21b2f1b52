#pragma once

// Small shared builders for tests: in-memory datasets, random nodes, and a
// scratch-directory helper for file-based tests.

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ttree/data.hpp"

namespace testutil {

/// Dataset with default metadata and explicit samples.
inline ttree::Dataset dataset_of(std::size_t dimension, std::vector<ttree::Sample> samples) {
    ttree::Dataset d = ttree::make_dataset(dimension);
    d.samples = std::move(samples);
    return d;
}

/// 1-D convenience: rows of (feature, treatment, outcome).
inline ttree::Dataset dataset_1d(const std::vector<std::array<double, 3>>& rows) {
    ttree::Dataset d = ttree::make_dataset(1);
    for (const auto& r : rows) d.samples.push_back({{r[0]}, r[1], r[2], {}});
    return d;
}

/// Random dataset: features U(0,1), treatment U(0,10), outcome N(0,1).
inline ttree::Dataset random_dataset(std::mt19937_64& gen, std::size_t n, std::size_t dimension,
                                     bool binary_treatment = false) {
    std::uniform_real_distribution<double> uf(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    std::normal_distribution<double> out(0.0, 1.0);
    ttree::Dataset d = ttree::make_dataset(dimension);
    for (std::size_t i = 0; i < n; ++i) {
        ttree::Sample s;
        for (std::size_t j = 0; j < dimension; ++j) s.features.push_back(uf(gen));
        s.treatment = binary_treatment ? static_cast<double>(gen() & 1) : ut(gen);
        s.outcome = out(gen);
        d.samples.push_back(std::move(s));
    }
    return d;
}

/// All-rows node over a split.
inline ttree::NodeSample whole_node(const ttree::DataSplit& split) {
    return ttree::NodeSample::whole(split);
}

/// Fresh scratch directory under the system temp dir; removed on destruction.
class ScratchDir {
  public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ttree-test-" + tag + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace testutil
