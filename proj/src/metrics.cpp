#include "srcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace srcl {

namespace {

void check_lengths(const Vector& truth, const Vector& pred, Index min_length) {
    if (truth.size() != pred.size()) {
        throw Error(ErrorCode::LengthMismatch, "truth has " + std::to_string(truth.size()) +
                                                   " values, prediction has " + std::to_string(pred.size()));
    }
    if (truth.size() < min_length) {
        throw Error(ErrorCode::Empty, "need at least " + std::to_string(min_length) + " samples");
    }
}

}  // namespace

double mean_absolute_error(const Vector& truth, const Vector& pred) {
    check_lengths(truth, pred, 1);
    return (truth - pred).cwiseAbs().mean();
}

double pearson_correlation(const Vector& truth, const Vector& pred) {
    check_lengths(truth, pred, 2);
    const Vector a = truth.array() - truth.mean();
    const Vector b = pred.array() - pred.mean();
    const double va = a.squaredNorm();
    const double vb = b.squaredNorm();
    if (va == 0.0 || vb == 0.0) {
        throw Error(ErrorCode::ConstantVector, "correlation is undefined for a constant vector");
    }
    return std::clamp(a.dot(b) / std::sqrt(va * vb), -1.0, 1.0);
}

double integral_agreement(const Vector& truth, const Vector& pred) {
    check_lengths(truth, pred, 1);
    Index hits = 0;
    for (Index i = 0; i < truth.size(); ++i) {
        if (std::ceil(truth[i]) == std::ceil(pred[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double tolerance_ratio(const Vector& truth, const Vector& pred, double tol, GradeComparison mode) {
    check_lengths(truth, pred, 1);
    if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
    Index hits = 0;
    for (Index i = 0; i < truth.size(); ++i) {
        const double err = mode == GradeComparison::Ceiled ? std::abs(std::ceil(pred[i]) - std::ceil(truth[i]))
                                                           : std::abs(pred[i] - truth[i]);
        if (err <= tol) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace srcl
