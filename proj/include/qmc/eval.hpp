#pragma once

#include "qmc/quantization.hpp"
#include "qmc/types.hpp"

namespace qmc {

struct EvalResult {
    double rmse_continuous = 0.0;  // recovered values vs held-out level centers
    double rmse_quantized = 0.0;   // after quantizing the recovered values
    double accuracy = 0.0;         // fraction of exact level matches
    double baseline_rmse = 0.0;    // global training mean predictor
};

// sqrt(mean over test of (x_ij - m_ij)²). Throws DomainError on an empty test set.
double rmse(const DenseMatrix& recovered, const ObservedMatrix& test);

// RMSE after snapping each recovered entry to its nearest level center.
double rmse_quantized(const DenseMatrix& recovered, const ObservedMatrix& test);

double quantized_accuracy(const DenseMatrix& recovered, const ObservedMatrix& test);

// Constant matrix equal to the mean training level center.
DenseMatrix baseline_mean_fill(const ObservedMatrix& train);

EvalResult evaluate(const DenseMatrix& recovered, const ObservedMatrix& train,
                    const ObservedMatrix& test);

}  // namespace qmc
