#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "srcl/augment.hpp"
#include "srcl/core.hpp"
#include "srcl/distances.hpp"
#include "srcl/solvers.hpp"

namespace srcl {

/// Reconstruction-based grading methods. The *_RC variants alternate between a
/// range-constrained weight solve and the closed-form grade update.
enum class Method { SC, LLC, SDC, SSGL, SC_RC, SDC_RC, SSGL_RC };

/// Hyperparameter presets: cup-to-disc ratio on resized disc images, or cataract
/// grading on bag-of-words histograms.
enum class Task { Cdr, Cataract };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);
std::span<const Method> all_methods();
std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

bool is_range_constrained(Method method);
/// The one-shot method an RC variant starts from (identity for the others).
Method baseline_method(Method method);
bool needs_distances(Method method);
bool needs_partition(Method method);

inline constexpr double kDegenerateEpsilon = 1e-12;

/// Column scaling applied to atoms and sample before any solve.
enum class FeatureScaling { None, UnitL2 };

std::string_view to_string(FeatureScaling scaling);
std::optional<FeatureScaling> parse_feature_scaling(std::string_view name);

struct MethodVariant {
    Method method = Method::SC;
    Hyperparameters hyper;
    DistanceKind distance_kind = DistanceKind::Euclidean;
    /// Distances are measured after scaling too. Zero vectors are left as they are.
    FeatureScaling scaling = FeatureScaling::None;
    /// Required when distance_kind is Custom (one value per atom).
    std::optional<Vector> custom_distances;
    /// SSGL groups; when absent atoms are binned by grade into `grade_bins` equal-width bins.
    std::optional<GroupPartition> partition;
    int grade_bins = 8;
    /// Gaussian locality width for LLC; 0 picks the median sample-to-atom distance.
    double llc_sigma = 0.0;
    GroupLassoOptions inner;

    void validate(Index atom_count) const;
};

/// Default hyperparameters for the method under the given task.
MethodVariant make_variant(Method method, Task task = Task::Cdr);

/// (w^T g) / (1^T w)
double baseline_grade(const SparseCoefficients& w, const Vector& grades);
/// sum w_i^2 g_i / sum w_i^2; always within [min g, max g].
double rc_grade_update(const SparseCoefficients& w, const Vector& grades);

/// Equal-width grade bins over [min g, max g]; empty bins are dropped.
GroupPartition partition_by_grade(const Vector& grades, int bins);

/// Grade range (max - min) over the `top_k` largest-magnitude nonzero weights.
double support_grade_range(const Vector& weights, const Vector& grades, std::size_t top_k);

struct VariantResult {
    SparseCoefficients coefficients;
    double grade = 0.0;
    SolveTrace trace;
};

/// Holds a dictionary and its gram matrix so that many samples can be graded against it.
/// Immutable after construction; `solve` may be called concurrently.
class Grader {
public:
    explicit Grader(Dictionary dict);

    const Dictionary& dictionary() const noexcept { return dict_; }
    VariantResult solve(const FeatureVector& y, const MethodVariant& variant) const;

private:
    const Dictionary& scaled(FeatureScaling scaling) const noexcept;
    const Matrix& gram(FeatureScaling scaling) const noexcept;

    Dictionary dict_;
    Dictionary unit_;
    Matrix gram_;
    Matrix unit_gram_;
};

VariantResult solve_variant(const FeatureVector& y, const Dictionary& dict, const MethodVariant& variant);

}  // namespace srcl
