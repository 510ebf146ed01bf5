#include "srcl/solvers.hpp"

#include <cmath>
#include <string>

namespace srcl {

SparseCoefficients llc_closed_form(const FeatureVector& y, const Dictionary& dict,
                                   const DistanceVector& c, double lambda1) {
    validate_problem(y, dict);
    if (c.size() != dict.size()) {
        throw Error(ErrorCode::DimensionMismatch, "locality vector length " +
                                                      std::to_string(c.size()) + " != atom count " +
                                                      std::to_string(dict.size()));
    }
    if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
        throw Error(ErrorCode::NegativeLambda, "lambda1 must be >= 0");
    }
    const Matrix& x = dict.atoms();
    Matrix system = x.transpose() * x;
    system.triangularView<Eigen::StrictlyUpper>() = system.transpose();
    system.diagonal() += lambda1 * c.values().cwiseAbs2();
    const Vector rhs = x.transpose() * y.values();

    Eigen::LDLT<Matrix> ldlt(system);
    const Vector pivots = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * pivots.maxCoeff())) {
        throw Error(ErrorCode::SingularSystem,
                    "X^T X + lambda1 diag(c)^2 is singular; use lambda1 > 0 or a full-rank dictionary");
    }
    return SparseCoefficients(ldlt.solve(rhs));
}

}  // namespace srcl
