#include "qmc/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmc {

QuantizationScheme::QuantizationScheme(std::vector<double> levels) : levels_(std::move(levels))
{
    if (levels_.size() < 2) {
        throw DomainError("a quantization scheme needs at least two levels");
    }
    for (double v : levels_) {
        if (!std::isfinite(v)) {
            throw DomainError("level values must be finite");
        }
    }
    gap_ = levels_[1] - levels_[0];
    if (!(gap_ > 0.0)) {
        throw DomainError("level values must be strictly increasing");
    }
    const double scale = std::max({std::abs(levels_.front()), std::abs(levels_.back()), gap_});
    for (std::size_t k = 1; k < levels_.size(); ++k) {
        const double d = levels_[k] - levels_[k - 1];
        if (std::abs(d - gap_) > 1e-12 * scale) {
            throw DomainError("level values must be uniformly spaced");
        }
    }
}

QuantizationScheme QuantizationScheme::uniform(double first, double gap, std::size_t count)
{
    if (!(gap > 0.0) || !std::isfinite(gap)) {
        throw DomainError("quantization gap must be positive");
    }
    std::vector<double> levels(count);
    for (std::size_t k = 0; k < count; ++k) {
        levels[k] = first + static_cast<double>(k) * gap;
    }
    return QuantizationScheme(std::move(levels));
}

double QuantizationScheme::center(std::size_t level) const
{
    if (level >= levels_.size()) {
        throw IndexError("level index " + std::to_string(level) + " out of range [0, " +
                         std::to_string(levels_.size()) + ")");
    }
    return levels_[level];
}

std::pair<double, double> QuantizationScheme::bounds_of(std::size_t level) const
{
    const double m = center(level);
    return {m - 0.5 * gap_, m + 0.5 * gap_};
}

std::size_t QuantizationScheme::quantize(double value) const
{
    if (!std::isfinite(value)) {
        throw DomainError("cannot quantize a non-finite value");
    }
    // floor(t + 1/2) sends exact midpoints up.
    const double t = (value - levels_.front()) / gap_;
    const double k = std::floor(t + 0.5);
    if (k <= 0.0) {
        return 0;
    }
    const auto last = static_cast<double>(levels_.size() - 1);
    return static_cast<std::size_t>(std::min(k, last));
}

std::size_t QuantizationScheme::level_of_center(double value) const
{
    const std::size_t k = quantize(value);
    if (std::abs(levels_[k] - value) > 1e-9 * gap_) {
        throw ValidationError("value " + std::to_string(value) + " is not a level of the scheme");
    }
    return k;
}

ObservedMatrix::ObservedMatrix(std::size_t rows, std::size_t cols,
                               std::vector<Observation> observations, QuantizationScheme scheme)
    : rows_(rows), cols_(cols), observations_(std::move(observations)), scheme_(std::move(scheme))
{
    if (observations_.size() > rows_ * cols_) {
        throw ValidationError("more observations than matrix entries");
    }
    std::vector<bool> seen(rows_ * cols_, false);
    for (const auto& o : observations_) {
        if (o.row >= rows_ || o.col >= cols_) {
            throw IndexError("observation (" + std::to_string(o.row) + ", " +
                             std::to_string(o.col) + ") outside " + std::to_string(rows_) + "x" +
                             std::to_string(cols_));
        }
        if (o.level >= scheme_.num_levels()) {
            throw IndexError("observation level " + std::to_string(o.level) + " out of range");
        }
        const std::size_t flat = o.row * cols_ + o.col;
        if (seen[flat]) {
            throw ValidationError("duplicate observation at (" + std::to_string(o.row) + ", " +
                                  std::to_string(o.col) + ")");
        }
        seen[flat] = true;
    }
}

DenseMatrix ObservedMatrix::zero_filled() const
{
    DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_),
                                      static_cast<Eigen::Index>(cols_));
    for (const auto& o : observations_) {
        m(o.row, o.col) = scheme_.center(o.level);
    }
    return m;
}

DenseMatrix ObservedMatrix::mask() const
{
    DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_),
                                      static_cast<Eigen::Index>(cols_));
    for (const auto& o : observations_) {
        m(o.row, o.col) = 1.0;
    }
    return m;
}

}  // namespace qmc
