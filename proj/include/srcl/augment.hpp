#pragma once

#include "srcl/core.hpp"
#include "srcl/distances.hpp"
#include "srcl/solvers.hpp"

namespace srcl {

/// A stacked least-squares system: ||target - design w||^2 equals the data term plus the
/// folded-in quadratic penalties.
struct AugmentedSystem {
    Vector target;
    Matrix design;
};

/// [y; 0_n] and [X; sqrt(gamma) * diag(current_grade - g_i)].
AugmentedSystem augment_with_rc(const FeatureVector& y, const Dictionary& dict, const RangeConstraint& rc);

/// Appends sqrt(lambda2) * diag(d) under the design and n zeros under the target.
AugmentedSystem augment_with_distance(const Vector& target, const Matrix& design,
                                      const DistanceVector& d, double lambda2);

/// Normal-equation counterparts of the two augmentations. Each adds a diagonal to the
/// gram matrix and one implied row per nonzero entry; the moment and target norm are unchanged.
NormalEquations add_range_constraint(NormalEquations system, const Vector& grades,
                                     const RangeConstraint& rc);
NormalEquations add_distance_penalty(NormalEquations system, const DistanceVector& d, double lambda2);

}  // namespace srcl
