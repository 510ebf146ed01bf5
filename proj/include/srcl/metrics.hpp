#pragma once

#include "srcl/core.hpp"

namespace srcl {

/// How tolerance_ratio compares grades: on their ceilings (integral grades) or as raw decimals.
enum class GradeComparison { Ceiled, RawDecimal };

double mean_absolute_error(const Vector& truth, const Vector& pred);
double pearson_correlation(const Vector& truth, const Vector& pred);
/// Fraction of samples whose ceiled grades agree.
double integral_agreement(const Vector& truth, const Vector& pred);
/// Fraction of samples with |ceil(pred) - ceil(truth)| <= tol (or |pred - truth| <= tol for RawDecimal).
double tolerance_ratio(const Vector& truth, const Vector& pred, double tol,
                       GradeComparison mode = GradeComparison::Ceiled);

}  // namespace srcl
