// Python bindings. Matrices follow the C++ layout: one column per atom / sample.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srcl/augment.hpp"
#include "srcl/data.hpp"
#include "srcl/features.hpp"
#include "srcl/grading.hpp"
#include "srcl/metrics.hpp"
#include "srcl/solvers.hpp"

namespace py = pybind11;
using namespace srcl;

namespace {

py::dict trace_entry(const TraceEntry& e) {
    py::dict d;
    d["iteration"] = e.iteration;
    d["weights"] = e.weights;
    d["grade"] = e.grade;
    d["objective"] = e.objective;
    d["subproblem_objective"] = e.subproblem_objective;
    d["inner_converged"] = e.inner_converged;
    return d;
}

py::dict variant_result(const VariantResult& r) {
    py::dict d;
    d["weights"] = r.coefficients.weights();
    d["support"] = r.coefficients.support();
    d["grade"] = r.grade;
    py::list its;
    for (const TraceEntry& e : r.trace.iterations) its.append(trace_entry(e));
    d["initial"] = r.trace.initial ? py::object(trace_entry(*r.trace.initial)) : py::object(py::none());
    d["iterations"] = its;
    d["converged"] = r.trace.converged;
    return d;
}

template <class E>
E parse_or_throw(std::optional<E> value, const std::string& what, const std::string& name) {
    if (!value) throw Error(ErrorCode::InvalidArgument, "unknown " + what + " '" + name + "'");
    return *value;
}

}  // namespace

PYBIND11_MODULE(_srcl, m) {
    m.doc() = "Sparse range-constrained grading: solvers, grading variants, features and metrics.";

    static py::exception<Error> error(m, "SrclError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::enum_<Method>(m, "Method")
        .value("SC", Method::SC)
        .value("LLC", Method::LLC)
        .value("SDC", Method::SDC)
        .value("SSGL", Method::SSGL)
        .value("SC_RC", Method::SC_RC)
        .value("SDC_RC", Method::SDC_RC)
        .value("SSGL_RC", Method::SSGL_RC);
    py::enum_<Task>(m, "Task").value("CDR", Task::Cdr).value("CATARACT", Task::Cataract);
    py::enum_<FeatureScaling>(m, "FeatureScaling")
        .value("NONE", FeatureScaling::None)
        .value("UNIT_L2", FeatureScaling::UnitL2);
    py::enum_<DistanceKind>(m, "DistanceKind")
        .value("EUCLIDEAN", DistanceKind::Euclidean)
        .value("GAUSSIAN_LOCALITY", DistanceKind::GaussianLocality)
        .value("CHI_SQUARE", DistanceKind::ChiSquare)
        .value("CUSTOM", DistanceKind::Custom);
    py::enum_<StopRule>(m, "StopRule")
        .value("FIXED_ITERATIONS", StopRule::FixedIterations)
        .value("TOLERANCE", StopRule::Tolerance);
    py::enum_<SolverStatus>(m, "SolverStatus")
        .value("CONVERGED", SolverStatus::Converged)
        .value("BUDGET_EXHAUSTED", SolverStatus::BudgetExhausted)
        .value("NUMERICAL_BREAKDOWN", SolverStatus::NumericalBreakdown)
        .value("MAX_ITERATIONS_EXCEEDED", SolverStatus::MaxIterationsExceeded);
    py::enum_<GradeComparison>(m, "GradeComparison")
        .value("CEILED", GradeComparison::Ceiled)
        .value("RAW_DECIMAL", GradeComparison::RawDecimal);

    m.def("parse_method", [](const std::string& name) { return parse_or_throw(parse_method(name), "method", name); });
    m.def("parse_task", [](const std::string& name) { return parse_or_throw(parse_task(name), "task", name); });
    m.def("method_name", [](Method method) { return std::string(to_string(method)); });
    m.def("all_methods", [] {
        const auto all = srcl::all_methods();
        return std::vector<Method>(all.begin(), all.end());
    });

    py::class_<Hyperparameters>(m, "Hyperparameters")
        .def(py::init<>())
        .def_readwrite("lambda1", &Hyperparameters::lambda1)
        .def_readwrite("lars_steps", &Hyperparameters::lars_steps)
        .def_readwrite("lambda2", &Hyperparameters::lambda2)
        .def_readwrite("lambda3", &Hyperparameters::lambda3)
        .def_readwrite("gamma", &Hyperparameters::gamma)
        .def_readwrite("max_outer_iterations", &Hyperparameters::max_outer_iterations)
        .def_readwrite("convergence_tolerance", &Hyperparameters::convergence_tolerance)
        .def_readwrite("stop_rule", &Hyperparameters::stop_rule);

    py::class_<MethodVariant>(m, "MethodVariant")
        .def(py::init<>())
        .def_readwrite("method", &MethodVariant::method)
        .def_readwrite("hyper", &MethodVariant::hyper)
        .def_readwrite("distance_kind", &MethodVariant::distance_kind)
        .def_readwrite("scaling", &MethodVariant::scaling)
        .def_readwrite("custom_distances", &MethodVariant::custom_distances)
        .def_readwrite("grade_bins", &MethodVariant::grade_bins)
        .def_readwrite("llc_sigma", &MethodVariant::llc_sigma)
        .def_property(
            "groups",
            [](const MethodVariant& v) -> std::optional<std::vector<std::vector<Index>>> {
                if (!v.partition) return std::nullopt;
                return v.partition->groups();
            },
            [](MethodVariant& v, std::optional<std::vector<std::vector<Index>>> groups) {
                if (!groups) {
                    v.partition.reset();
                    return;
                }
                Index n = 0;
                for (const auto& g : *groups)
                    for (Index i : g) n = std::max(n, i + 1);
                v.partition = GroupPartition::with_default_weights(std::move(*groups), n);
            },
            "SSGL groups (default sqrt(|G|) weights); None bins atoms by grade");

    m.def("make_variant", &make_variant, py::arg("method"), py::arg("task") = Task::Cdr);

    py::class_<Grader>(m, "Grader")
        .def(py::init([](Matrix atoms, Vector grades) { return Grader(Dictionary(std::move(atoms), std::move(grades))); }),
             py::arg("atoms"), py::arg("grades"))
        .def_property_readonly("atoms", [](const Grader& g) { return g.dictionary().atoms(); })
        .def_property_readonly("grades", [](const Grader& g) { return g.dictionary().grades(); })
        .def(
            "solve",
            [](const Grader& g, Vector y, const MethodVariant& v) {
                VariantResult r = [&] {
                    py::gil_scoped_release release;
                    return g.solve(FeatureVector(std::move(y)), v);
                }();
                return variant_result(r);
            },
            py::arg("sample"), py::arg("variant"))
        .def(
            "grade_all",
            [](const Grader& g, const Matrix& samples, const MethodVariant& v) {
                Vector out(samples.cols());
                py::gil_scoped_release release;
                for (Index i = 0; i < samples.cols(); ++i) out[i] = g.solve(FeatureVector(samples.col(i)), v).grade;
                return out;
            },
            py::arg("samples"), py::arg("variant"), "Grades every column of `samples`.");

    m.def(
        "baseline_grade", [](Vector w, const Vector& g) { return baseline_grade(SparseCoefficients(std::move(w)), g); },
        py::arg("weights"), py::arg("grades"));
    m.def(
        "rc_grade_update", [](Vector w, const Vector& g) { return rc_grade_update(SparseCoefficients(std::move(w)), g); },
        py::arg("weights"), py::arg("grades"));
    m.def("support_grade_range", &support_grade_range, py::arg("weights"), py::arg("grades"), py::arg("top_k") = 20);

    m.def(
        "lars_l1",
        [](const Matrix& X, const Vector& y, int max_steps) {
            LarsOptions o;
            o.max_steps = max_steps;
            const LarsResult r = lars_l1(X, y, o);
            return py::make_tuple(r.coefficients.weights(), r.status, r.steps);
        },
        py::arg("design"), py::arg("target"), py::arg("max_steps") = 100,
        "Returns (weights, status, steps).");
    m.def(
        "sparse_group_lasso",
        [](const Matrix& X, const Vector& y, double lambda1, double lambda3, std::vector<std::vector<Index>> groups) {
            const GroupPartition p = GroupPartition::with_default_weights(std::move(groups), X.cols());
            const GroupLassoResult r = sparse_group_lasso(X, y, lambda1, lambda3, p);
            return py::make_tuple(r.coefficients.weights(), r.status, r.iterations);
        },
        py::arg("design"), py::arg("target"), py::arg("lambda1"), py::arg("lambda3"), py::arg("groups"),
        "Minimises 0.5||y - Xw||^2 + lambda1 ||w||_1 + lambda3 sum sqrt(|G|) ||w_G||; returns (weights, status, "
        "iterations).");

    m.def(
        "augment_with_rc",
        [](Vector y, Matrix atoms, Vector grades, double gamma, double grade) {
            const AugmentedSystem a = augment_with_rc(FeatureVector(std::move(y)),
                                                      Dictionary(std::move(atoms), std::move(grades)),
                                                      RangeConstraint(gamma, grade));
            return py::make_tuple(a.target, a.design);
        },
        py::arg("target"), py::arg("atoms"), py::arg("grades"), py::arg("gamma"), py::arg("grade"));
    m.def(
        "augment_with_distance",
        [](const Vector& target, const Matrix& design, Vector d, double lambda2) {
            const AugmentedSystem a = augment_with_distance(target, design, custom_distances(std::move(d)), lambda2);
            return py::make_tuple(a.target, a.design);
        },
        py::arg("target"), py::arg("design"), py::arg("distances"), py::arg("lambda2"));

    m.def(
        "euclidean_distances",
        [](Vector y, Matrix atoms) {
            const Index n = atoms.cols();
            return euclidean_distances(FeatureVector(std::move(y)), Dictionary(std::move(atoms), Vector::Zero(n)))
                .values();
        },
        py::arg("sample"), py::arg("atoms"));
    m.def(
        "chi_square_distances",
        [](Vector y, Matrix atoms) {
            const Index n = atoms.cols();
            return chi_square_distances(FeatureVector(std::move(y)), Dictionary(std::move(atoms), Vector::Zero(n)))
                .values();
        },
        py::arg("sample"), py::arg("atoms"));

    m.def("mean_absolute_error", &mean_absolute_error, py::arg("truth"), py::arg("pred"));
    m.def("pearson_correlation", &pearson_correlation, py::arg("truth"), py::arg("pred"));
    m.def("integral_agreement", &integral_agreement, py::arg("truth"), py::arg("pred"));
    m.def("tolerance_ratio", &tolerance_ratio, py::arg("truth"), py::arg("pred"), py::arg("tol"),
          py::arg("mode") = GradeComparison::Ceiled);

    m.def(
        "generate_synthetic",
        [](Index n_ref, Index n_test, Index dimension, double noise_sigma, double nuisance_fraction,
           Index nuisance_rank, std::uint64_t seed) {
            SyntheticOptions o;
            o.n_ref = n_ref;
            o.n_test = n_test;
            o.dimension = dimension;
            o.noise_sigma = noise_sigma;
            o.nuisance_fraction = nuisance_fraction;
            o.nuisance_rank = nuisance_rank;
            o.seed = seed;
            const SyntheticDataset d = generate_synthetic(o);
            return py::make_tuple(d.reference.features, d.reference.grades, d.test.features, d.test.grades);
        },
        py::arg("n_ref") = 120, py::arg("n_test") = 200, py::arg("dimension") = 2500, py::arg("noise_sigma") = 0.05,
        py::arg("nuisance_fraction") = 0.3, py::arg("nuisance_rank") = 100, py::arg("seed") = 7,
        "Returns (ref_features, ref_grades, test_features, test_grades).");

    m.def("patch_count", &patch_count, py::arg("height"), py::arg("width"), py::arg("patch_size") = 3);
    m.def(
        "extract_patches", [](Matrix img, Index s) { return extract_patches(GrayImage(std::move(img)), s); },
        py::arg("image"), py::arg("patch_size") = 3);
    m.def(
        "resize_flatten", [](Matrix img, Index side) { return resize_flatten(GrayImage(std::move(img)), side).values(); },
        py::arg("image"), py::arg("side") = 50);
    m.def(
        "build_codebook",
        [](const Matrix& patches, Index k, std::uint64_t seed, Index patch_size) {
            return build_codebook(patches, k, seed, patch_size).centroids();
        },
        py::arg("patches"), py::arg("k"), py::arg("seed"), py::arg("patch_size") = 3,
        "Returns the centroid matrix (one column per visual word).");
    m.def(
        "bow_histogram",
        [](Matrix img, Matrix centroids, Index patch_size) {
            return bow_histogram(GrayImage(std::move(img)), Codebook(std::move(centroids), patch_size)).values();
        },
        py::arg("image"), py::arg("centroids"), py::arg("patch_size") = 3);
}
