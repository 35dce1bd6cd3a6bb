#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qmc/error.hpp"
#include "qmc/types.hpp"

namespace qmc {

// Uniform quantizer: level centers spaced by `gap`, each level owning the
// closed interval [center - gap/2, center + gap/2].
class QuantizationScheme {
public:
    // Throws DomainError unless levels has >= 2 entries, strictly increasing,
    // with constant spacing (1e-12 relative).
    explicit QuantizationScheme(std::vector<double> levels);

    // `count` levels starting at `first`, spaced by `gap`.
    static QuantizationScheme uniform(double first, double gap, std::size_t count);

    std::size_t num_levels() const noexcept { return levels_.size(); }
    const std::vector<double>& level_values() const noexcept { return levels_; }
    double gap() const noexcept { return gap_; }

    double center(std::size_t level) const;
    std::pair<double, double> bounds_of(std::size_t level) const;

    // Nearest level; clamps beyond the extreme levels, ties go to the higher level.
    std::size_t quantize(double value) const;

    // Level whose center equals `value` to 1e-9·gap; throws ValidationError otherwise.
    std::size_t level_of_center(double value) const;

    double lowest_bound() const { return levels_.front() - 0.5 * gap_; }
    double highest_bound() const { return levels_.back() + 0.5 * gap_; }

    friend bool operator==(const QuantizationScheme&, const QuantizationScheme&) = default;

private:
    std::vector<double> levels_;
    double gap_ = 0.0;
};

struct Observation {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t level = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// Partially observed quantized matrix: Ω with the level index of each entry.
class ObservedMatrix {
public:
    // Validates indices, levels and uniqueness of (row, col).
    ObservedMatrix(std::size_t rows, std::size_t cols, std::vector<Observation> observations,
                   QuantizationScheme scheme);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return observations_.size(); }
    bool empty() const noexcept { return observations_.empty(); }
    const std::vector<Observation>& observations() const noexcept { return observations_; }
    const QuantizationScheme& scheme() const noexcept { return scheme_; }

    double center(const Observation& o) const { return scheme_.center(o.level); }

    // Level centers at observed positions, zero elsewhere.
    DenseMatrix zero_filled() const;

    // 1 at observed positions, 0 elsewhere.
    DenseMatrix mask() const;

    friend bool operator==(const ObservedMatrix&, const ObservedMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Observation> observations_;
    QuantizationScheme scheme_;
};

template <typename Derived>
void check_shape(const Eigen::MatrixBase<Derived>& x, const ObservedMatrix& obs)
{
    if (static_cast<std::size_t>(x.rows()) != obs.rows() ||
        static_cast<std::size_t>(x.cols()) != obs.cols()) {
        throw DimensionError("matrix is " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " but observations are " +
                             std::to_string(obs.rows()) + "x" + std::to_string(obs.cols()));
    }
}

// Number of observed entries of x outside their closed quantization interval.
template <typename Derived>
std::size_t violation_count(const Eigen::MatrixBase<Derived>& x, const ObservedMatrix& obs)
{
    check_shape(x, obs);
    std::size_t count = 0;
    for (const auto& o : obs.observations()) {
        const auto [lo, hi] = obs.scheme().bounds_of(o.level);
        const double v = static_cast<double>(x(o.row, o.col));
        if (!(v >= lo && v <= hi)) {
            ++count;
        }
    }
    return count;
}

}  // namespace qmc
