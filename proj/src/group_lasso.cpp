#include "srcl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace srcl {

double largest_eigenvalue(const Matrix& symmetric, int iterations) {
    const Index n = symmetric.cols();
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector next = symmetric * v;
        const double norm = next.norm();
        if (norm == 0.0) return 0.0;
        estimate = norm;
        v = next / norm;
    }
    return estimate;
}

namespace {

void check_partition(const GroupPartition& partition, Index n) {
    if (partition.size() != n) {
        throw Error(ErrorCode::MissingPartition, "partition covers " + std::to_string(partition.size()) +
                                                     " indices, design has " + std::to_string(n) +
                                                     " columns");
    }
}

double penalty(const Vector& w, double lambda1, double lambda3, const GroupPartition& partition) {
    double group_term = 0.0;
    for (std::size_t g = 0; g < partition.group_count(); ++g) {
        double sq = 0.0;
        for (Index i : partition.groups()[g]) sq += w[i] * w[i];
        group_term += partition.group_weights()[static_cast<Index>(g)] * std::sqrt(sq);
    }
    return lambda1 * w.lpNorm<1>() + lambda3 * group_term;
}

// prox of step * (lambda1 ||.||_1 + lambda3 sum psi_g ||._g||), applied in place.
void prox(Vector& v, double step, double lambda1, double lambda3, const GroupPartition& partition) {
    const double l1 = step * lambda1;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) - l1;
        v[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
    }
    if (lambda3 == 0.0) return;
    for (std::size_t g = 0; g < partition.group_count(); ++g) {
        const auto& idx = partition.groups()[g];
        double sq = 0.0;
        for (Index i : idx) sq += v[i] * v[i];
        const double norm = std::sqrt(sq);
        const double threshold = step * lambda3 * partition.group_weights()[static_cast<Index>(g)];
        if (norm <= threshold) {
            for (Index i : idx) v[i] = 0.0;
        } else {
            const double scale = 1.0 - threshold / norm;
            for (Index i : idx) v[i] *= scale;
        }
    }
}

}  // namespace

double sparse_group_lasso_objective(const NormalEquations& system, const Vector& w, double lambda1,
                                    double lambda3, const GroupPartition& partition) {
    return 0.5 * system.residual_sq(w) + penalty(w, lambda1, lambda3, partition);
}

GroupLassoResult sparse_group_lasso(const Matrix& design, const Vector& target, double lambda1,
                                    double lambda3, const GroupPartition& partition,
                                    const GroupLassoOptions& options) {
    return sparse_group_lasso(NormalEquations::from_design(design, target), lambda1, lambda3, partition,
                              options);
}

GroupLassoResult sparse_group_lasso(const NormalEquations& system, double lambda1, double lambda3,
                                    const GroupPartition& partition, const GroupLassoOptions& options) {
    const Index n = system.size();
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "design has no columns");
    check_partition(partition, n);
    if (!(lambda1 >= 0.0) || !(lambda3 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda3)) {
        throw Error(ErrorCode::NegativeLambda, "lambda1 and lambda3 must be >= 0");
    }
    if (!system.gram.allFinite() || !system.moment.allFinite()) {
        throw Error(ErrorCode::NonFiniteData, "least-squares system is not finite");
    }

    const double lipschitz = largest_eigenvalue(system.gram, options.power_iterations);
    auto objective = [&](const Vector& w) {
        return sparse_group_lasso_objective(system, w, lambda1, lambda3, partition);
    };

    Vector w = Vector::Zero(n);
    double current = objective(w);
    if (lipschitz == 0.0) {
        return {SparseCoefficients(std::move(w)), SolverStatus::Converged, 0, current};
    }
    const double step = 1.0 / lipschitz;

    Vector momentum_point = w;
    double momentum = 1.0;
    Vector best = w;
    double best_value = current;
    SolverStatus status = SolverStatus::MaxIterationsExceeded;
    int iterations = 0;

    for (int it = 1; it <= options.max_iterations; ++it) {
        iterations = it;
        Vector next = momentum_point - step * (system.gram * momentum_point - system.moment);
        prox(next, step, lambda1, lambda3, partition);
        double value = objective(next);

        if (value > current) {
            // Momentum overshot: restart from the last iterate with a plain proximal step.
            momentum = 1.0;
            momentum_point = w;
            next = w - step * (system.gram * w - system.moment);
            prox(next, step, lambda1, lambda3, partition);
            value = objective(next);
        }

        const double stationarity = 2.0 * lipschitz * (next - momentum_point).norm();
        const double change = std::abs(current - value) / std::max(std::abs(current), 1e-300);

        const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        Vector extrapolated = next + ((momentum - 1.0) / next_momentum) * (next - w);
        momentum = next_momentum;
        w = std::move(next);
        current = value;
        momentum_point = std::move(extrapolated);
        if (current <= best_value) {
            best_value = current;
            best = w;
        }

        if (change < options.inner_tolerance && stationarity <= options.stationarity_tolerance) {
            status = SolverStatus::Converged;
            best = w;
            best_value = current;
            break;
        }
    }

    return {SparseCoefficients(std::move(best)), status, iterations, best_value};
}

}  // namespace srcl
