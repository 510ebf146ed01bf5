#include "srcl/grading.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace srcl {

namespace {

constexpr std::array<Method, 7> kMethods = {Method::SC,    Method::LLC,    Method::SDC,    Method::SSGL,
                                            Method::SC_RC, Method::SDC_RC, Method::SSGL_RC};

std::string normalize_name(std::string_view name) {
    std::string out;
    for (char ch : name) {
        const auto c = static_cast<unsigned char>(ch);
        if (ch == '_' || ch == '-') {
            out.push_back('+');
        } else if (!std::isspace(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::SC: return "sc";
        case Method::LLC: return "llc";
        case Method::SDC: return "sdc";
        case Method::SSGL: return "ssgl";
        case Method::SC_RC: return "sc+rc";
        case Method::SDC_RC: return "sdc+rc";
        case Method::SSGL_RC: return "ssgl+rc";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    const std::string key = normalize_name(name);
    for (Method m : kMethods) {
        if (key == to_string(m)) return m;
    }
    return std::nullopt;
}

std::span<const Method> all_methods() { return kMethods; }

std::string_view to_string(Task task) { return task == Task::Cdr ? "cdr" : "cataract"; }

std::optional<Task> parse_task(std::string_view name) {
    const std::string key = normalize_name(name);
    if (key == "cdr") return Task::Cdr;
    if (key == "cataract") return Task::Cataract;
    return std::nullopt;
}

bool is_range_constrained(Method method) {
    return method == Method::SC_RC || method == Method::SDC_RC || method == Method::SSGL_RC;
}

Method baseline_method(Method method) {
    switch (method) {
        case Method::SC_RC: return Method::SC;
        case Method::SDC_RC: return Method::SDC;
        case Method::SSGL_RC: return Method::SSGL;
        default: return method;
    }
}

bool needs_distances(Method method) {
    const Method base = baseline_method(method);
    return base == Method::SDC || base == Method::SSGL;
}

bool needs_partition(Method method) { return baseline_method(method) == Method::SSGL; }

void MethodVariant::validate(Index atom_count) const {
    hyper.validate();
    if (needs_distances(method) && distance_kind == DistanceKind::Custom) {
        if (!custom_distances) {
            throw Error(ErrorCode::MissingDistances,
                        std::string(to_string(method)) + " needs a distance vector");
        }
        if (custom_distances->size() != atom_count) {
            throw Error(ErrorCode::DimensionMismatch, "custom distance vector is not aligned with the atoms");
        }
    }
    if (needs_partition(method)) {
        if (partition) {
            if (partition->size() != atom_count) {
                throw Error(ErrorCode::MissingPartition, "group partition does not cover the dictionary");
            }
        } else if (grade_bins < 1) {
            throw Error(ErrorCode::MissingPartition, "grade_bins must be >= 1 when no partition is given");
        }
    }
    if (llc_sigma < 0.0 || !std::isfinite(llc_sigma)) {
        throw Error(ErrorCode::NonPositiveSigma, "llc_sigma must be > 0 (or 0 for automatic)");
    }
}

MethodVariant make_variant(Method method, Task task) {
    MethodVariant v;
    v.method = method;
    Hyperparameters& h = v.hyper;
    h.lars_steps = 100;
    h.stop_rule = StopRule::FixedIterations;
    h.convergence_tolerance = 1e-4;
    const Method base = baseline_method(method);

    if (task == Task::Cdr) {
        v.distance_kind = DistanceKind::Euclidean;
        v.scaling = FeatureScaling::UnitL2;
        if (base == Method::SDC) h.lambda2 = 1e4;
        if (base == Method::SSGL) {
            h.lambda1 = 0.01;
            h.lambda2 = 10.0;
            h.lambda3 = 0.05;
        }
        if (method == Method::SC_RC || method == Method::SDC_RC) h.gamma = 200.0;
        if (method == Method::SSGL_RC) h.gamma = 100.0;
    } else {
        v.distance_kind = DistanceKind::ChiSquare;
        if (base == Method::SDC) h.lambda2 = 2.0;
        if (base == Method::SSGL) {
            h.lambda1 = 0.035;
            h.lambda2 = 10.0;
            h.lambda3 = 0.05;
        }
        if (is_range_constrained(method)) h.gamma = 100.0;
    }
    if (method == Method::LLC) h.lambda1 = 1e-4;

    switch (method) {
        case Method::SC_RC: h.max_outer_iterations = 10; break;
        case Method::SDC_RC: h.max_outer_iterations = 8; break;
        case Method::SSGL_RC: h.max_outer_iterations = 5; break;
        default: h.max_outer_iterations = 1; break;
    }
    return v;
}

double baseline_grade(const SparseCoefficients& w, const Vector& grades) {
    if (w.size() != grades.size()) throw Error(ErrorCode::DimensionMismatch, "weights/grades length differ");
    const double total = w.weights().sum();
    if (!(std::abs(total) > kDegenerateEpsilon)) {
        throw Error(ErrorCode::DegenerateWeights, "weights sum to (nearly) zero");
    }
    return w.weights().dot(grades) / total;
}

double rc_grade_update(const SparseCoefficients& w, const Vector& grades) {
    if (w.size() != grades.size()) throw Error(ErrorCode::DimensionMismatch, "weights/grades length differ");
    const Vector sq = w.weights().cwiseAbs2();
    const double total = sq.sum();
    if (!(total > kDegenerateEpsilon)) {
        throw Error(ErrorCode::DegenerateWeights, "all weights are (nearly) zero");
    }
    const double grade = sq.dot(grades) / total;
    // Rounding can push a convex combination a hair outside its range.
    return std::clamp(grade, grades.minCoeff(), grades.maxCoeff());
}

GroupPartition partition_by_grade(const Vector& grades, int bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be >= 1");
    const Index n = grades.size();
    const double lo = grades.minCoeff();
    const double hi = grades.maxCoeff();
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(bins));
    const double width = (hi - lo) / bins;
    for (Index i = 0; i < n; ++i) {
        int bin = 0;
        if (width > 0.0) bin = std::min(static_cast<int>((grades[i] - lo) / width), bins - 1);
        groups[static_cast<std::size_t>(bin)].push_back(i);
    }
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    return GroupPartition::with_default_weights(std::move(groups), n);
}

double support_grade_range(const Vector& weights, const Vector& grades, std::size_t top_k) {
    std::vector<Index> idx = compute_support(weights);
    if (idx.empty()) return 0.0;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Index a, Index b) { return std::abs(weights[a]) > std::abs(weights[b]); });
    if (idx.size() > top_k) idx.resize(top_k);
    double lo = grades[idx.front()];
    double hi = lo;
    for (Index i : idx) {
        lo = std::min(lo, grades[i]);
        hi = std::max(hi, grades[i]);
    }
    return hi - lo;
}

namespace {

Vector unit_scaled(Vector v) {
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

Dictionary unit_dictionary(const Dictionary& dict) {
    Matrix atoms = dict.atoms();
    for (Index j = 0; j < atoms.cols(); ++j) atoms.col(j) = unit_scaled(atoms.col(j));
    return Dictionary(std::move(atoms), dict.grades());
}

Matrix symmetric_gram(const Matrix& atoms) {
    Matrix g = atoms.transpose() * atoms;
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

}  // namespace

std::string_view to_string(FeatureScaling scaling) {
    return scaling == FeatureScaling::UnitL2 ? "unit-l2" : "none";
}

std::optional<FeatureScaling> parse_feature_scaling(std::string_view name) {
    const std::string key = normalize_name(name);
    if (key == "none") return FeatureScaling::None;
    if (key == "unit+l2" || key == "l2") return FeatureScaling::UnitL2;
    return std::nullopt;
}

Grader::Grader(Dictionary dict)
    : dict_(std::move(dict)),
      unit_(unit_dictionary(dict_)),
      gram_(symmetric_gram(dict_.atoms())),
      unit_gram_(symmetric_gram(unit_.atoms())) {}

const Dictionary& Grader::scaled(FeatureScaling scaling) const noexcept {
    return scaling == FeatureScaling::UnitL2 ? unit_ : dict_;
}

const Matrix& Grader::gram(FeatureScaling scaling) const noexcept {
    return scaling == FeatureScaling::UnitL2 ? unit_gram_ : gram_;
}

namespace {

struct InnerSolution {
    Vector weights;
    bool ok = true;
};

double median(Vector values) {
    std::sort(values.data(), values.data() + values.size());
    const Index n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// One weight subproblem of the method family on an (optionally RC-augmented) system.
class Subproblem {
public:
    Subproblem(const MethodVariant& variant, std::optional<DistanceVector> distances,
               std::optional<GroupPartition> partition)
        : variant_(variant),
          family_(baseline_method(variant.method)),
          distances_(std::move(distances)),
          partition_(std::move(partition)) {}

    NormalEquations finish(NormalEquations system) const {
        if (family_ == Method::SDC || family_ == Method::SSGL) {
            return add_distance_penalty(std::move(system), *distances_, variant_.hyper.lambda2);
        }
        return system;
    }

    InnerSolution solve(const NormalEquations& data_term) const {
        const NormalEquations system = finish(data_term);
        if (family_ == Method::SSGL) {
            auto r = sparse_group_lasso(system, variant_.hyper.lambda1, variant_.hyper.lambda3, *partition_,
                                        variant_.inner);
            return {r.coefficients.weights(), r.status == SolverStatus::Converged};
        }
        LarsOptions options;
        options.max_steps = variant_.hyper.lars_steps;
        auto r = lars_l1(system, options);
        return {r.coefficients.weights(), r.status != SolverStatus::NumericalBreakdown};
    }

    double objective(const NormalEquations& data_term, const Vector& w) const {
        const NormalEquations system = finish(data_term);
        if (family_ == Method::SSGL) {
            return sparse_group_lasso_objective(system, w, variant_.hyper.lambda1, variant_.hyper.lambda3,
                                                *partition_);
        }
        return system.residual_sq(w);
    }

private:
    const MethodVariant& variant_;
    Method family_;
    std::optional<DistanceVector> distances_;
    std::optional<GroupPartition> partition_;
};

}  // namespace

VariantResult Grader::solve(const FeatureVector& sample, const MethodVariant& variant) const {
    validate_problem(sample, dict_);
    variant.validate(dict_.size());
    const Dictionary& dict = scaled(variant.scaling);
    const FeatureVector y = variant.scaling == FeatureScaling::UnitL2 ? FeatureVector(unit_scaled(sample.values()))
                                                                      : sample;
    const Vector& grades = dict.grades();

    if (variant.method == Method::LLC) {
        const double sigma = variant.llc_sigma > 0.0 ? variant.llc_sigma
                                                     : std::max(median(euclidean_distances(y, dict).values()),
                                                                1e-12);
        const DistanceVector c = gaussian_locality(y, dict, sigma);
        SparseCoefficients w = llc_closed_form(y, dict, c, variant.hyper.lambda1);
        const double grade = baseline_grade(w, grades);
        const Vector& x = w.weights();
        const double obj = (y.values() - dict.atoms() * x).squaredNorm() +
                           variant.hyper.lambda1 * c.values().cwiseProduct(x).squaredNorm();
        SolveTrace trace;
        trace.iterations.push_back({1, x, grade, obj, obj, true});
        trace.converged = true;
        trace.final_grade = grade;
        return {std::move(w), grade, std::move(trace)};
    }

    std::optional<DistanceVector> distances;
    if (needs_distances(variant.method)) {
        switch (variant.distance_kind) {
            case DistanceKind::Euclidean: distances = euclidean_distances(y, dict); break;
            case DistanceKind::ChiSquare: distances = chi_square_distances(y, dict); break;
            case DistanceKind::Custom: distances = custom_distances(*variant.custom_distances); break;
            case DistanceKind::GaussianLocality: {
                const double sigma = variant.llc_sigma > 0.0
                                         ? variant.llc_sigma
                                         : std::max(median(euclidean_distances(y, dict).values()), 1e-12);
                distances = gaussian_locality(y, dict, sigma);
                break;
            }
        }
    }
    std::optional<GroupPartition> partition;
    if (needs_partition(variant.method)) {
        partition = variant.partition ? *variant.partition : partition_by_grade(grades, variant.grade_bins);
    }
    const Subproblem sub(variant, std::move(distances), std::move(partition));

    NormalEquations data_term;
    data_term.gram = gram(variant.scaling);
    data_term.moment = dict.atoms().transpose() * y.values();
    data_term.target_norm_sq = y.values().squaredNorm();
    data_term.rows = dict.dimension();

    const InnerSolution base = sub.solve(data_term);
    SparseCoefficients base_coef(base.weights);
    const double base_grade = baseline_grade(base_coef, grades);

    if (!is_range_constrained(variant.method)) {
        const double obj = sub.objective(data_term, base.weights);
        SolveTrace trace;
        trace.iterations.push_back({1, base.weights, base_grade, obj, obj, base.ok});
        trace.converged = base.ok;
        trace.final_grade = base_grade;
        return {std::move(base_coef), base_grade, std::move(trace)};
    }

    const double gamma = variant.hyper.gamma;
    auto with_rc = [&](double grade) {
        return add_range_constraint(data_term, grades, RangeConstraint(gamma, grade));
    };

    SolveTrace trace;
    trace.initial = TraceEntry{0, base.weights, base_grade, sub.objective(with_rc(base_grade), base.weights),
                               sub.objective(data_term, base.weights), base.ok};
    SparseCoefficients current = base_coef;
    double grade = base_grade;
    bool converged = false;

    for (int t = 1; t <= variant.hyper.max_outer_iterations; ++t) {
        const NormalEquations system = with_rc(grade);
        InnerSolution step = sub.solve(system);
        SparseCoefficients coef(step.weights);
        if (coef.support_size() == 0) {
            converged = false;
            break;
        }
        const double next_grade = rc_grade_update(coef, grades);
        TraceEntry entry;
        entry.iteration = t;
        entry.subproblem_objective = sub.objective(system, step.weights);
        entry.objective = sub.objective(with_rc(next_grade), step.weights);
        entry.weights = step.weights;
        entry.grade = next_grade;
        entry.inner_converged = step.ok;
        trace.iterations.push_back(std::move(entry));

        const double change = std::abs(next_grade - grade);
        current = std::move(coef);
        grade = next_grade;
        converged = change < variant.hyper.convergence_tolerance;
        if (variant.hyper.stop_rule == StopRule::Tolerance && converged) break;
    }

    trace.converged = converged;
    trace.final_grade = grade;
    if (trace.iterations.empty()) {
        // Degenerate first iteration: fall back to the baseline solution, flagged.
        return {std::move(base_coef), base_grade, std::move(trace)};
    }
    return {std::move(current), grade, std::move(trace)};
}

VariantResult solve_variant(const FeatureVector& y, const Dictionary& dict, const MethodVariant& variant) {
    return Grader(dict).solve(y, variant);
}

}  // namespace srcl
