#include "srcl/core.hpp"

#include <cmath>
#include <string>

namespace srcl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyDictionary: return "EmptyDictionary";
        case ErrorCode::NonFiniteData: return "NonFiniteData";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::NegativeHistogramEntry: return "NegativeHistogramEntry";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::NegativeGamma: return "NegativeGamma";
        case ErrorCode::NegativeLambda: return "NegativeLambda";
        case ErrorCode::DegenerateWeights: return "DegenerateWeights";
        case ErrorCode::MissingDistances: return "MissingDistances";
        case ErrorCode::MissingPartition: return "MissingPartition";
        case ErrorCode::InvalidImage: return "InvalidImage";
        case ErrorCode::ImageSmallerThanPatch: return "ImageSmallerThanPatch";
        case ErrorCode::TooFewPatches: return "TooFewPatches";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::ConstantVector: return "ConstantVector";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::GradeMissing: return "GradeMissing";
        case ErrorCode::BadDimension: return "BadDimension";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

void require_finite(const Eigen::Ref<const Matrix>& values, const char* what) {
    if (!values.allFinite()) {
        throw Error(ErrorCode::NonFiniteData, std::string(what) + " contains a non-finite entry");
    }
}

}  // namespace

FeatureVector::FeatureVector(Vector values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "feature vector must have length > 0");
    }
    require_finite(values_, "feature vector");
}

Dictionary::Dictionary(Matrix atoms, Vector grades)
    : atoms_(std::move(atoms)), grades_(std::move(grades)) {
    if (atoms_.cols() < 2) {
        throw Error(ErrorCode::EmptyDictionary,
                    "dictionary needs at least 2 atoms, got " + std::to_string(atoms_.cols()));
    }
    if (atoms_.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "dictionary atoms must have length > 0");
    }
    if (grades_.size() != atoms_.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "grade count " + std::to_string(grades_.size()) + " != atom count " +
                        std::to_string(atoms_.cols()));
    }
    require_finite(atoms_, "dictionary atoms");
    require_finite(grades_, "dictionary grades");
}

std::vector<Index> compute_support(const Vector& weights, double support_epsilon) {
    std::vector<Index> support;
    for (Index i = 0; i < weights.size(); ++i) {
        if (std::abs(weights[i]) > support_epsilon) support.push_back(i);
    }
    return support;
}

SparseCoefficients::SparseCoefficients(Vector weights, double support_epsilon)
    : weights_(std::move(weights)), support_(compute_support(weights_, support_epsilon)) {}

GroupPartition::GroupPartition(std::vector<std::vector<Index>> groups, Vector group_weights, Index n)
    : groups_(std::move(groups)), weights_(std::move(group_weights)), n_(n) {
    if (static_cast<Index>(groups_.size()) != weights_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one weight per group is required");
    }
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].empty()) {
            throw Error(ErrorCode::InvalidArgument, "group " + std::to_string(g) + " is empty");
        }
        if (!(weights_[static_cast<Index>(g)] > 0.0) || !std::isfinite(weights_[static_cast<Index>(g)])) {
            throw Error(ErrorCode::InvalidArgument, "group weights must be strictly positive");
        }
        for (Index i : groups_[g]) {
            if (i < 0 || i >= n) {
                throw Error(ErrorCode::InvalidArgument, "group index out of range");
            }
            if (seen[static_cast<std::size_t>(i)]++ != 0) {
                throw Error(ErrorCode::InvalidArgument,
                            "index " + std::to_string(i) + " appears in more than one group");
            }
        }
    }
    for (Index i = 0; i < n; ++i) {
        if (seen[static_cast<std::size_t>(i)] == 0) {
            throw Error(ErrorCode::MissingPartition,
                        "index " + std::to_string(i) + " is not covered by any group");
        }
    }
}

GroupPartition GroupPartition::with_default_weights(std::vector<std::vector<Index>> groups, Index n) {
    Vector weights(static_cast<Index>(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        weights[static_cast<Index>(g)] = std::sqrt(static_cast<double>(groups[g].size()));
    }
    return GroupPartition(std::move(groups), std::move(weights), n);
}

RangeConstraint::RangeConstraint(double gamma_, double current_grade_)
    : gamma(gamma_), current_grade(current_grade_) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::NegativeGamma, "range-constraint weight must be >= 0");
    }
    if (!std::isfinite(current_grade)) {
        throw Error(ErrorCode::NonFiniteData, "current grade is not finite");
    }
}

void Hyperparameters::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::NegativeLambda, std::string(name) + " must be a finite value >= 0");
        }
    };
    nonneg(lambda1, "lambda1");
    nonneg(lambda2, "lambda2");
    nonneg(lambda3, "lambda3");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::NegativeGamma, "gamma must be a finite value >= 0");
    }
    nonneg(convergence_tolerance, "convergence_tolerance");
    if (lars_steps < 1) throw Error(ErrorCode::InvalidArgument, "lars_steps must be >= 1");
    if (max_outer_iterations < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_outer_iterations must be >= 1");
    }
}

void validate_problem(const FeatureVector& y, const Dictionary& dict) {
    if (dict.size() < 2) throw Error(ErrorCode::EmptyDictionary, "dictionary needs at least 2 atoms");
    if (y.size() != dict.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "sample length " + std::to_string(y.size()) + " != atom length " +
                        std::to_string(dict.dimension()));
    }
    if (dict.grades().size() != dict.size()) {
        throw Error(ErrorCode::DimensionMismatch, "grades are not aligned with atoms");
    }
    require_finite(y.values(), "sample");
    require_finite(dict.atoms(), "dictionary atoms");
    require_finite(dict.grades(), "dictionary grades");
}

}  // namespace srcl
