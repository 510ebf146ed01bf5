#include "srcl/distances.hpp"

#include <cmath>
#include <string>

namespace srcl {

DistanceVector::DistanceVector(Vector values, DistanceKind kind)
    : values_(std::move(values)), kind_(kind) {
    for (Index i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorCode::NonFiniteData, "distance " + std::to_string(i) + " is not finite");
        }
        if (values_[i] < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "distance " + std::to_string(i) + " is negative");
        }
    }
}

namespace {

void check_dimensions(const FeatureVector& y, const Dictionary& dict) {
    if (y.size() != dict.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "sample length " + std::to_string(y.size()) + " != atom length " +
                        std::to_string(dict.dimension()));
    }
}

Vector squared_distances(const FeatureVector& y, const Dictionary& dict) {
    Vector out(dict.size());
    for (Index i = 0; i < dict.size(); ++i) {
        out[i] = (y.values() - dict.atom(i)).squaredNorm();
    }
    return out;
}

}  // namespace

DistanceVector euclidean_distances(const FeatureVector& y, const Dictionary& dict) {
    check_dimensions(y, dict);
    return DistanceVector(squared_distances(y, dict).cwiseSqrt(), DistanceKind::Euclidean);
}

DistanceVector gaussian_locality(const FeatureVector& y, const Dictionary& dict, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::NonPositiveSigma, "sigma must be > 0");
    }
    check_dimensions(y, dict);
    Vector c = (squared_distances(y, dict) / (2.0 * sigma * sigma)).array().exp().matrix();
    if (!c.allFinite()) {
        throw Error(ErrorCode::NonFiniteData, "locality overflowed; increase sigma");
    }
    return DistanceVector(std::move(c), DistanceKind::GaussianLocality);
}

double chi_square_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    double total = 0.0;
    for (Index k = 0; k < a.size(); ++k) {
        const double denom = a[k] + b[k];
        if (denom == 0.0) continue;
        const double diff = a[k] - b[k];
        total += diff * diff / denom;
    }
    return 0.5 * total;
}

DistanceVector chi_square_distances(const FeatureVector& y, const Dictionary& dict) {
    check_dimensions(y, dict);
    if ((y.values().array() < 0.0).any() || (dict.atoms().array() < 0.0).any()) {
        throw Error(ErrorCode::NegativeHistogramEntry, "chi-square distance needs nonnegative histograms");
    }
    Vector out(dict.size());
    for (Index i = 0; i < dict.size(); ++i) {
        out[i] = chi_square_distance(y.values(), dict.atom(i));
    }
    return DistanceVector(std::move(out), DistanceKind::ChiSquare);
}

DistanceVector custom_distances(Vector values) {
    return DistanceVector(std::move(values), DistanceKind::Custom);
}

}  // namespace srcl
