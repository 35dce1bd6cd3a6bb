#include "qmc/eval.hpp"

#include <cmath>

#include "qmc/error.hpp"

namespace qmc {
namespace {

void check_test(const DenseMatrix& recovered, const ObservedMatrix& test)
{
    check_shape(recovered, test);
    if (test.empty()) {
        throw DomainError("evaluation needs a nonempty test set");
    }
}

}  // namespace

double rmse(const DenseMatrix& recovered, const ObservedMatrix& test)
{
    check_test(recovered, test);
    double sum = 0.0;
    for (const auto& o : test.observations()) {
        const double d = recovered(o.row, o.col) - test.center(o);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(test.size()));
}

double rmse_quantized(const DenseMatrix& recovered, const ObservedMatrix& test)
{
    check_test(recovered, test);
    const auto& s = test.scheme();
    double sum = 0.0;
    for (const auto& o : test.observations()) {
        const double d = s.center(s.quantize(recovered(o.row, o.col))) - test.center(o);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(test.size()));
}

double quantized_accuracy(const DenseMatrix& recovered, const ObservedMatrix& test)
{
    check_test(recovered, test);
    std::size_t hits = 0;
    for (const auto& o : test.observations()) {
        hits += test.scheme().quantize(recovered(o.row, o.col)) == o.level;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

DenseMatrix baseline_mean_fill(const ObservedMatrix& train)
{
    if (train.empty()) {
        throw DomainError("mean-fill baseline needs a nonempty training set");
    }
    double sum = 0.0;
    for (const auto& o : train.observations()) {
        sum += train.center(o);
    }
    const double mean = sum / static_cast<double>(train.size());
    return DenseMatrix::Constant(static_cast<Eigen::Index>(train.rows()),
                                 static_cast<Eigen::Index>(train.cols()), mean);
}

EvalResult evaluate(const DenseMatrix& recovered, const ObservedMatrix& train,
                    const ObservedMatrix& test)
{
    return {rmse(recovered, test), rmse_quantized(recovered, test),
            quantized_accuracy(recovered, test), rmse(baseline_mean_fill(train), test)};
}

}  // namespace qmc
