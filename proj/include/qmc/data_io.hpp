#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "qmc/quantization.hpp"
#include "qmc/types.hpp"

namespace qmc {

struct RatingRecord {
    std::size_t user = 0;
    std::size_t item = 0;
    std::size_t level = 0;
    std::int64_t timestamp = 0;
};

struct RatingsDataset {
    std::size_t user_count = 0;
    std::size_t item_count = 0;
    std::vector<RatingRecord> records;
    QuantizationScheme scheme;

    ObservedMatrix to_observed() const;
};

// MovieLens five-star scale: levels 1..5, gap 1.
QuantizationScheme movielens_scheme();

// Reads `user item rating timestamp` lines with 1-based ids. Dimensions are
// max id unless overridden (overrides smaller than the data are an error).
RatingsDataset load_ratings(const std::filesystem::path& path, char delimiter = '\t',
                            const QuantizationScheme& scheme = movielens_scheme(),
                            std::optional<std::size_t> users = std::nullopt,
                            std::optional<std::size_t> items = std::nullopt);

struct MaskSplit {
    ObservedMatrix train;
    ObservedMatrix test;
    double missing_rate;
    std::uint64_t seed;
};

// Moves floor(missing_rate·|Ω|) uniformly chosen observations into test.
MaskSplit make_split(const ObservedMatrix& obs, double missing_rate, std::uint64_t seed);

struct SyntheticInstance {
    DenseMatrix ground_truth;
    ObservedMatrix observed;
    std::size_t true_rank;
    std::uint64_t seed;
};

SyntheticInstance generate_synthetic(std::size_t rows, std::size_t cols, std::size_t rank,
                                     const QuantizationScheme& scheme,
                                     double observation_fraction, std::uint64_t seed);

// Text format: "rows cols" header, then one line per row of
// space-separated values printed with max_digits10.
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix load_matrix(const std::filesystem::path& path);

// Observation files: header "rows cols levels first gap", then "row col level" lines.
void save_observed(const std::filesystem::path& path, const ObservedMatrix& obs);
ObservedMatrix load_observed(const std::filesystem::path& path);

}  // namespace qmc
