#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "srcl/error.hpp"

namespace srcl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Weights with magnitude at or below this are outside the support.
inline constexpr double kSupportEpsilon = 1e-10;

/// A sample to be represented (length m, finite entries).
class FeatureVector {
public:
    explicit FeatureVector(Vector values);

    const Vector& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

private:
    Vector values_;
};

/// Reference atoms (columns of an m x n matrix) with one grade per atom.
class Dictionary {
public:
    Dictionary(Matrix atoms, Vector grades);

    const Matrix& atoms() const noexcept { return atoms_; }
    const Vector& grades() const noexcept { return grades_; }
    Index size() const noexcept { return atoms_.cols(); }
    Index dimension() const noexcept { return atoms_.rows(); }
    auto atom(Index i) const { return atoms_.col(i); }
    double min_grade() const { return grades_.minCoeff(); }
    double max_grade() const { return grades_.maxCoeff(); }

private:
    Matrix atoms_;
    Vector grades_;
};

/// Reconstruction weights and the index set of their non-negligible entries.
class SparseCoefficients {
public:
    explicit SparseCoefficients(Vector weights, double support_epsilon = kSupportEpsilon);

    const Vector& weights() const noexcept { return weights_; }
    const std::vector<Index>& support() const noexcept { return support_; }
    std::size_t support_size() const noexcept { return support_.size(); }
    Index size() const noexcept { return weights_.size(); }

private:
    Vector weights_;
    std::vector<Index> support_;
};

std::vector<Index> compute_support(const Vector& weights, double support_epsilon = kSupportEpsilon);

/// Disjoint groups covering 0..n-1, each with a strictly positive weight.
class GroupPartition {
public:
    GroupPartition(std::vector<std::vector<Index>> groups, Vector group_weights, Index n);

    /// Uses the conventional weight sqrt(|G_i|) for every group.
    static GroupPartition with_default_weights(std::vector<std::vector<Index>> groups, Index n);

    const std::vector<std::vector<Index>>& groups() const noexcept { return groups_; }
    const Vector& group_weights() const noexcept { return weights_; }
    std::size_t group_count() const noexcept { return groups_.size(); }
    Index size() const noexcept { return n_; }

private:
    std::vector<std::vector<Index>> groups_;
    Vector weights_;
    Index n_;
};

/// Weight of the range-constraint term and the grade estimate it pulls towards.
struct RangeConstraint {
    RangeConstraint(double gamma, double current_grade);

    double gamma;
    double current_grade;
};

enum class StopRule { FixedIterations, Tolerance };

struct Hyperparameters {
    double lambda1 = 0.0;  // l1 weight for the proximal and closed-form solvers
    int lars_steps = 100;  // l1 budget when the homotopy solver is used
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    double gamma = 0.0;
    int max_outer_iterations = 10;
    double convergence_tolerance = 1e-4;
    StopRule stop_rule = StopRule::FixedIterations;

    void validate() const;
};

struct TraceEntry {
    int iteration = 0;
    Vector weights;
    double grade = 0.0;
    /// Variant objective at (w_t, g_t).
    double objective = 0.0;
    /// Weight subproblem objective at (w_t, g_{t-1}).
    double subproblem_objective = 0.0;
    bool inner_converged = true;
};

struct SolveTrace {
    /// Baseline solution used to seed the alternating loop (RC variants only).
    std::optional<TraceEntry> initial;
    std::vector<TraceEntry> iterations;
    bool converged = false;
    double final_grade = 0.0;
};

/// Throws srcl::Error unless y matches the dictionary and all invariants hold.
void validate_problem(const FeatureVector& y, const Dictionary& dict);

}  // namespace srcl
