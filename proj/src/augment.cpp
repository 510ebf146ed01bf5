#include "srcl/augment.hpp"

#include <cmath>
#include <string>

namespace srcl {

namespace {

void check_lambda(double lambda2) {
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
        throw Error(ErrorCode::NegativeLambda, "lambda2 must be >= 0");
    }
}

Vector rc_diagonal(const Vector& grades, const RangeConstraint& rc) {
    return (rc.current_grade - grades.array()).matrix();
}

}  // namespace

AugmentedSystem augment_with_rc(const FeatureVector& y, const Dictionary& dict, const RangeConstraint& rc) {
    validate_problem(y, dict);
    if (!(rc.gamma >= 0.0)) throw Error(ErrorCode::NegativeGamma, "gamma must be >= 0");
    const Index m = dict.dimension();
    const Index n = dict.size();
    AugmentedSystem out;
    out.target = Vector::Zero(m + n);
    out.target.head(m) = y.values();
    out.design = Matrix::Zero(m + n, n);
    out.design.topRows(m) = dict.atoms();
    out.design.bottomRows(n).diagonal() = std::sqrt(rc.gamma) * rc_diagonal(dict.grades(), rc);
    return out;
}

AugmentedSystem augment_with_distance(const Vector& target, const Matrix& design,
                                      const DistanceVector& d, double lambda2) {
    check_lambda(lambda2);
    const Index rows = design.rows();
    const Index n = design.cols();
    if (target.size() != rows) {
        throw Error(ErrorCode::DimensionMismatch, "target length does not match design rows");
    }
    if (d.size() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "distance length " + std::to_string(d.size()) + " != column count " + std::to_string(n));
    }
    AugmentedSystem out;
    out.target = Vector::Zero(rows + n);
    out.target.head(rows) = target;
    out.design = Matrix::Zero(rows + n, n);
    out.design.topRows(rows) = design;
    out.design.bottomRows(n).diagonal() = std::sqrt(lambda2) * d.values();
    return out;
}

NormalEquations add_range_constraint(NormalEquations system, const Vector& grades, const RangeConstraint& rc) {
    if (grades.size() != system.size()) {
        throw Error(ErrorCode::DimensionMismatch, "grades are not aligned with the system columns");
    }
    if (!(rc.gamma >= 0.0)) throw Error(ErrorCode::NegativeGamma, "gamma must be >= 0");
    const Vector added = rc.gamma * rc_diagonal(grades, rc).cwiseAbs2();
    system.gram.diagonal() += added;
    system.rows += (added.array() != 0.0).count();  // zero rows add no rank
    return system;
}

NormalEquations add_distance_penalty(NormalEquations system, const DistanceVector& d, double lambda2) {
    check_lambda(lambda2);
    if (d.size() != system.size()) {
        throw Error(ErrorCode::DimensionMismatch, "distance vector is not aligned with the system columns");
    }
    const Vector added = lambda2 * d.values().cwiseAbs2();
    system.gram.diagonal() += added;
    system.rows += (added.array() != 0.0).count();
    return system;
}

}  // namespace srcl
