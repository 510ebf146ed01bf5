#pragma once

#include <vector>

#include "srcl/core.hpp"
#include "srcl/distances.hpp"

namespace srcl {

/// A least-squares data term ||target - design w||^2 held as its normal equations:
/// gram = design^T design, moment = design^T target. `rows` is the row count of the
/// design it stands for (bounds the LARS active set).
struct NormalEquations {
    Matrix gram;
    Vector moment;
    double target_norm_sq = 0.0;
    Index rows = 0;

    static NormalEquations from_design(const Matrix& design, const Vector& target);

    Index size() const noexcept { return gram.cols(); }
    /// ||target - design w||^2 evaluated from the normal equations.
    double residual_sq(const Vector& w) const;
};

enum class SolverStatus {
    Converged,             // reached the end of the path / met the tolerance
    BudgetExhausted,       // LARS stopped at its step budget
    NumericalBreakdown,    // LARS met a rank-deficient active set and halted
    MaxIterationsExceeded  // proximal solver hit its iteration cap
};

const char* to_string(SolverStatus status);

struct LarsOptions {
    int max_steps = 100;
    bool record_path = false;
};

struct LarsResult {
    SparseCoefficients coefficients;
    SolverStatus status = SolverStatus::Converged;
    int steps = 0;
    /// Weights after each step when LarsOptions::record_path is set.
    std::vector<Vector> path;
};

/// Lasso path by least angle regression with the lasso (drop) modification.
/// Stops after `max_steps` add/drop events or at the least-squares end of the path.
/// Ties between equally correlated columns go to the lowest index.
LarsResult lars_l1(const Matrix& design, const Vector& target, const LarsOptions& options = {});
LarsResult lars_l1(const NormalEquations& system, const LarsOptions& options = {});

/// argmin ||y - X w||^2 + lambda1 ||c .* w||^2 via the regularised normal equations.
SparseCoefficients llc_closed_form(const FeatureVector& y, const Dictionary& dict,
                                   const DistanceVector& c, double lambda1);

struct GroupLassoOptions {
    double inner_tolerance = 1e-8;
    int max_iterations = 10000;
    int power_iterations = 50;
    /// Bound on the KKT residual implied by the final proximal step.
    double stationarity_tolerance = 1e-7;
};

struct GroupLassoResult {
    SparseCoefficients coefficients;
    SolverStatus status = SolverStatus::Converged;
    int iterations = 0;
    double objective = 0.0;
};

/// Minimises 1/2 ||target - design w||^2 + lambda1 ||w||_1 + lambda3 sum_g psi_g ||w_g||_2
/// by accelerated proximal gradient (soft-threshold, then group shrinkage).
GroupLassoResult sparse_group_lasso(const Matrix& design, const Vector& target, double lambda1,
                                    double lambda3, const GroupPartition& partition,
                                    const GroupLassoOptions& options = {});
GroupLassoResult sparse_group_lasso(const NormalEquations& system, double lambda1, double lambda3,
                                    const GroupPartition& partition,
                                    const GroupLassoOptions& options = {});

double sparse_group_lasso_objective(const NormalEquations& system, const Vector& w, double lambda1,
                                    double lambda3, const GroupPartition& partition);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double largest_eigenvalue(const Matrix& symmetric, int iterations);

}  // namespace srcl
