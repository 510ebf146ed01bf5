#include "srcl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace srcl {

const char* to_string(SolverStatus status) {
    switch (status) {
        case SolverStatus::Converged: return "converged";
        case SolverStatus::BudgetExhausted: return "budget_exhausted";
        case SolverStatus::NumericalBreakdown: return "numerical_breakdown";
        case SolverStatus::MaxIterationsExceeded: return "max_iterations_exceeded";
    }
    return "unknown";
}

NormalEquations NormalEquations::from_design(const Matrix& design, const Vector& target) {
    if (design.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "design has no columns");
    if (target.size() != design.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "target length " + std::to_string(target.size()) + " != design rows " +
                        std::to_string(design.rows()));
    }
    NormalEquations ne;
    ne.gram = design.transpose() * design;
    // Mirror the lower triangle so the matrix is exactly symmetric.
    ne.gram.triangularView<Eigen::StrictlyUpper>() = ne.gram.transpose();
    ne.moment = design.transpose() * target;
    ne.target_norm_sq = target.squaredNorm();
    ne.rows = design.rows();
    return ne;
}

double NormalEquations::residual_sq(const Vector& w) const {
    const double value = target_norm_sq - 2.0 * moment.dot(w) + w.dot(gram * w);
    return std::max(value, 0.0);
}

namespace {

// Lower Cholesky factor of gram restricted to the active set, grown one column at a time.
class ActiveCholesky {
public:
    explicit ActiveCholesky(Index capacity) : factor_(capacity, capacity) {}

    // Returns false when the new column is (numerically) in the span of the active ones.
    bool add(const Matrix& gram, const std::vector<Index>& active, Index column) {
        const auto k = static_cast<Index>(active.size());
        const double diag = gram(column, column);
        if (k == 0) {
            if (!(diag > 0.0)) return false;
            factor_(0, 0) = std::sqrt(diag);
            size_ = 1;
            return true;
        }
        Vector cross(k);
        for (Index i = 0; i < k; ++i) cross[i] = gram(active[static_cast<std::size_t>(i)], column);
        factor_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(cross);
        const double pivot_sq = diag - cross.squaredNorm();
        if (!(pivot_sq > kRankTolerance * diag)) return false;
        factor_.block(k, 0, 1, k) = cross.transpose();
        factor_(k, k) = std::sqrt(pivot_sq);
        size_ = k + 1;
        return true;
    }

    bool rebuild(const Matrix& gram, const std::vector<Index>& active) {
        size_ = 0;
        std::vector<Index> prefix;
        for (Index j : active) {
            if (!add(gram, prefix, j)) return false;
            prefix.push_back(j);
        }
        return true;
    }

    Vector solve(const Vector& rhs) const {
        const auto l = factor_.topLeftCorner(size_, size_).triangularView<Eigen::Lower>();
        Vector x = l.solve(rhs);
        return l.transpose().solve(x);
    }

private:
    static constexpr double kRankTolerance = 1e-10;
    Matrix factor_;
    Index size_ = 0;
};

constexpr double kTieTolerance = 1e-12;

}  // namespace

LarsResult lars_l1(const Matrix& design, const Vector& target, const LarsOptions& options) {
    return lars_l1(NormalEquations::from_design(design, target), options);
}

LarsResult lars_l1(const NormalEquations& system, const LarsOptions& options) {
    const Index n = system.size();
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "design has no columns");
    if (system.gram.rows() != n || system.moment.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "normal equations are not square/aligned");
    }
    if (options.max_steps < 1) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
    if (!system.gram.allFinite() || !system.moment.allFinite()) {
        throw Error(ErrorCode::NonFiniteData, "least-squares system is not finite");
    }

    const Matrix& gram = system.gram;
    Vector w = Vector::Zero(n);
    Vector corr = system.moment;  // design^T (target - design w)
    std::vector<Index> active;
    std::vector<double> signs;
    std::vector<char> is_active(static_cast<std::size_t>(n), 0);
    const Index max_active = std::min<Index>(n, system.rows > 0 ? system.rows : n);
    ActiveCholesky chol(n);

    LarsResult result{SparseCoefficients(Vector::Zero(n)), SolverStatus::Converged, 0, {}};

    Index entering = 0;
    double max_corr = 0.0;
    for (Index j = 0; j < n; ++j) {
        if (std::abs(corr[j]) > max_corr) {
            max_corr = std::abs(corr[j]);
            entering = j;
        }
    }
    const double corr_floor = 1e-12 * std::max(max_corr, std::numeric_limits<double>::min());
    if (max_corr == 0.0) return result;

    Index just_dropped = -1;
    while (true) {
        if (result.steps >= options.max_steps) {
            result.status = SolverStatus::BudgetExhausted;
            break;
        }
        if (entering >= 0) {
            if (!chol.add(gram, active, entering)) {
                // Rank-deficient: leave the newest column out and stop the path here.
                result.status = SolverStatus::NumericalBreakdown;
                break;
            }
            active.push_back(entering);
            signs.push_back(corr[entering] >= 0.0 ? 1.0 : -1.0);
            is_active[static_cast<std::size_t>(entering)] = 1;
        }

        const auto k = static_cast<Index>(active.size());
        Vector sign_vec(k);
        for (Index i = 0; i < k; ++i) sign_vec[i] = signs[static_cast<std::size_t>(i)];
        const Vector u = chol.solve(sign_vec);
        const double norm_sq = sign_vec.dot(u);
        if (!(norm_sq > 0.0)) {
            result.status = SolverStatus::NumericalBreakdown;
            break;
        }
        const double equiangular = 1.0 / std::sqrt(norm_sq);
        const Vector direction = equiangular * u;

        Vector rate = Vector::Zero(n);  // d corr / d step = -rate
        for (Index i = 0; i < k; ++i) {
            rate += gram.col(active[static_cast<std::size_t>(i)]) * direction[i];
        }

        double step = max_corr / equiangular;
        Index next = -1;
        if (k < max_active) {
            for (Index j = 0; j < n; ++j) {
                if (is_active[static_cast<std::size_t>(j)]) continue;
                double candidate = std::numeric_limits<double>::infinity();
                // A column that just left sits on the boundary with the sign it had; it may only
                // come back from the opposite side.
                const bool dropped = j == just_dropped;
                const bool upper_ok = !dropped || corr[j] < 0.0;
                const bool lower_ok = !dropped || corr[j] > 0.0;
                if (!dropped && std::abs(corr[j]) >= max_corr * (1.0 - kTieTolerance)) {
                    candidate = 0.0;  // tied now: enters with a zero-length step
                }
                const double lo = equiangular - rate[j];
                const double hi = equiangular + rate[j];
                if (upper_ok && lo > 0.0) {
                    const double g = (max_corr - corr[j]) / lo;
                    if (g > 0.0) candidate = std::min(candidate, g);
                }
                if (lower_ok && hi > 0.0) {
                    const double g = (max_corr + corr[j]) / hi;
                    if (g > 0.0) candidate = std::min(candidate, g);
                }
                if (candidate < step) {
                    step = candidate;
                    next = j;
                }
            }
        }

        Index drop_slot = -1;
        for (Index i = 0; i < k; ++i) {
            const Index j = active[static_cast<std::size_t>(i)];
            if (direction[i] == 0.0) continue;
            const double g = -w[j] / direction[i];
            if (g > 0.0 && g < step) {
                step = g;
                drop_slot = i;
            }
        }

        for (Index i = 0; i < k; ++i) w[active[static_cast<std::size_t>(i)]] += step * direction[i];
        corr -= step * rate;
        max_corr = std::max(max_corr - step * equiangular, 0.0);
        ++result.steps;
        just_dropped = -1;

        if (drop_slot >= 0) {
            const Index j = active[static_cast<std::size_t>(drop_slot)];
            w[j] = 0.0;
            is_active[static_cast<std::size_t>(j)] = 0;
            active.erase(active.begin() + drop_slot);
            signs.erase(signs.begin() + drop_slot);
            if (!chol.rebuild(gram, active)) {
                result.status = SolverStatus::NumericalBreakdown;
                if (options.record_path) result.path.push_back(w);
                break;
            }
            just_dropped = j;
            entering = -1;
        } else if (next >= 0) {
            entering = next;
        } else {
            // Active correlations reached zero: least-squares end of the path.
            if (options.record_path) result.path.push_back(w);
            result.status = SolverStatus::Converged;
            break;
        }
        if (options.record_path) result.path.push_back(w);
        if (max_corr <= corr_floor) {
            result.status = SolverStatus::Converged;
            break;
        }
        if (active.empty() && entering < 0) {
            result.status = SolverStatus::Converged;
            break;
        }
    }

    result.coefficients = SparseCoefficients(std::move(w));
    return result;
}

}  // namespace srcl
