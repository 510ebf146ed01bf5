#pragma once

#include "srcl/core.hpp"

namespace srcl {

enum class DistanceKind { Euclidean, GaussianLocality, ChiSquare, Custom };

/// Per-atom distance (or LLC locality) between a sample and each dictionary atom.
class DistanceVector {
public:
    DistanceVector(Vector values, DistanceKind kind);

    const Vector& values() const noexcept { return values_; }
    DistanceKind kind() const noexcept { return kind_; }
    Index size() const noexcept { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

private:
    Vector values_;
    DistanceKind kind_;
};

/// values[i] = ||y - x_i||_2
DistanceVector euclidean_distances(const FeatureVector& y, const Dictionary& dict);

/// values[i] = exp(||y - x_i||^2 / (2 sigma^2)). Grows with distance: far atoms are penalised harder.
DistanceVector gaussian_locality(const FeatureVector& y, const Dictionary& dict, double sigma);

/// values[i] = 1/2 sum_k (y_k - x_ik)^2 / (y_k + x_ik); 0/0 terms contribute nothing.
DistanceVector chi_square_distances(const FeatureVector& y, const Dictionary& dict);

/// Caller-supplied distances (e.g. a shape-similarity measure computed elsewhere).
DistanceVector custom_distances(Vector values);

double chi_square_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

}  // namespace srcl
