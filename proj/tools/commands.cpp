#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "srcl/data.hpp"
#include "srcl/features.hpp"
#include "srcl/grading.hpp"
#include "srcl/metrics.hpp"

namespace fs = std::filesystem;

namespace srcl::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 7;

// Solver errors carry the failing sample so the caller can map them to exit code 2.
struct SampleFailure {
    Index sample;
    std::string message;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    const char* env = std::getenv("SRCL_SEED");
    if (env == nullptr || *env == '\0') return kDefaultSeed;
    std::uint64_t value = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::InvalidArgument, "SRCL_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    return value;
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// Shortest text that parses back to the same double.
std::string exact(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

using MetricRows = std::vector<std::pair<std::string, double>>;

void print_metrics(std::ostream& out, const MetricRows& rows, bool csv) {
    if (csv) {
        out << "metric,value\n";
        for (const auto& [name, value] : rows) out << name << ',' << fmt(value) << '\n';
        return;
    }
    std::size_t width = 0;
    for (const auto& row : rows) width = std::max(width, row.first.size());
    for (const auto& [name, value] : rows) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << name << fmt(value) << '\n';
    }
}

double safe_pearson(const Vector& truth, const Vector& pred) {
    if (truth.size() < 2) return std::nan("");
    try {
        return pearson_correlation(truth, pred);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConstantVector) return std::nan("");
        throw;
    }
}

MetricRows task_metrics(Task task, const Vector& truth, const Vector& pred) {
    if (truth.size() != pred.size()) {
        throw Error(ErrorCode::LengthMismatch, "truth has " + std::to_string(truth.size()) + " grades, predictions " +
                                                   std::to_string(pred.size()));
    }
    if (task == Task::Cdr) {
        return {{"n", static_cast<double>(truth.size())},
                {"delta", mean_absolute_error(truth, pred)},
                {"correlation", safe_pearson(truth, pred)}};
    }
    return {{"n", static_cast<double>(truth.size())},
            {"epsilon", mean_absolute_error(truth, pred)},
            {"R0", integral_agreement(truth, pred)},
            {"R0.5", tolerance_ratio(truth, pred, 0.5, GradeComparison::Ceiled)},
            {"R1", tolerance_ratio(truth, pred, 1.0, GradeComparison::Ceiled)},
            {"R0.5_raw", tolerance_ratio(truth, pred, 0.5, GradeComparison::RawDecimal)},
            {"R1_raw", tolerance_ratio(truth, pred, 1.0, GradeComparison::RawDecimal)}};
}

Task task_from(const std::string& name) {
    auto task = parse_task(name);
    if (!task) throw Error(ErrorCode::InvalidArgument, "unknown task '" + name + "' (expected cdr or cataract)");
    return *task;
}

std::string valid_variant_names() {
    std::string names;
    for (Method m : all_methods()) {
        if (!names.empty()) names += ", ";
        names += to_string(m);
    }
    return names;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
    SyntheticOptions options;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    SyntheticOptions options = a.options;
    options.seed = resolve_seed(a.seed);
    const SyntheticDataset data = generate_synthetic(options);
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    save_samples(dir / "refs.csv", data.reference);
    save_samples(dir / "tests.csv", data.test);
    DatasetManifest manifest;
    // Relative to the manifest's own directory.
    manifest.reference_path = "refs.csv";
    manifest.test_path = "tests.csv";
    manifest.seed = options.seed;
    save_manifest(dir / "manifest.json", manifest);
    out << "wrote " << (dir / "refs.csv").string() << " (" << data.reference.size() << " samples), "
        << (dir / "tests.csv").string() << " (" << data.test.size() << " samples), "
        << (dir / "manifest.json").string() << '\n';
    return kOk;
}

// ---- bow -----------------------------------------------------------------

struct BowArgs {
    std::string images;
    Index k = 100;
    Index patch = 3;
    int max_iterations = 300;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string labels;
};

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::IoError, "no .pgm or .csv images in " + dir.string());
    return files;
}

int cmd_bow(const BowArgs& a, std::ostream& out) {
    const std::uint64_t seed = resolve_seed(a.seed);
    const std::vector<fs::path> files = list_images(a.images);
    std::vector<GrayImage> images;
    images.reserve(files.size());
    Index total = 0;
    for (const auto& f : files) {
        images.push_back(load_image(f));
        total += patch_count(images.back().height(), images.back().width(), a.patch);
    }
    Matrix patches(a.patch * a.patch, total);
    Index col = 0;
    for (const auto& img : images) {
        const Matrix p = extract_patches(img, a.patch);
        patches.middleCols(col, p.cols()) = p;
        col += p.cols();
    }
    KMeansOptions km;
    km.max_iterations = a.max_iterations;
    const Codebook codebook = build_codebook(patches, a.k, seed, a.patch, km);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    save_codebook(dir / "codebook.json", codebook);

    const fs::path hist_path = dir / "histograms.csv";
    if (a.labels.empty()) {
        std::ofstream csv(hist_path);
        if (!csv) throw Error(ErrorCode::IoError, "cannot write " + hist_path.string());
        csv << "image";
        for (Index j = 0; j < codebook.size(); ++j) csv << ",f" << j;
        csv << '\n';
        for (std::size_t i = 0; i < files.size(); ++i) {
            csv << files[i].filename().string();
            const Vector h = bow_histogram(images[i], codebook).values();
            for (Index j = 0; j < h.size(); ++j) csv << ',' << exact(h[j]);
            csv << '\n';
        }
        if (!csv) throw Error(ErrorCode::IoError, "failed writing " + hist_path.string());
    } else {
        // Label file: `image,grade` rows; histograms follow its row order.
        DatasetManifest manifest;
        manifest.reference_path = a.labels;
        manifest.test_path = a.labels;
        manifest.feature_kind = FeatureKind::BagOfWords;
        manifest.codebook_path = dir / "codebook.json";
        save_samples(hist_path, load_dataset(manifest).reference);
    }
    out << "codebook: " << codebook.size() << " centroids from " << total << " patches of " << files.size()
        << " images -> " << (dir / "codebook.json").string() << '\n';
    out << "histograms -> " << hist_path.string() << '\n';
    return kOk;
}

// ---- grade ---------------------------------------------------------------

struct GradeArgs {
    std::string variant;
    std::string refs;
    std::string tests;
    std::string manifest;
    std::string task = "cdr";
    std::optional<double> gamma;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::optional<double> lambda3;
    std::optional<int> steps;
    std::optional<int> fixed_iters;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::string scaling;
    int jobs = 1;
    std::string report;
    std::string predictions;
    bool csv = false;
};

struct SampleResult {
    double grade = 0.0;
    std::size_t support_size = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

MethodVariant build_variant(const GradeArgs& a, Method method, Task task) {
    MethodVariant v = make_variant(method, task);
    Hyperparameters& h = v.hyper;
    if (a.gamma) h.gamma = *a.gamma;
    if (a.lambda1) h.lambda1 = *a.lambda1;
    if (a.lambda2) h.lambda2 = *a.lambda2;
    if (a.lambda3) h.lambda3 = *a.lambda3;
    if (a.steps) h.lars_steps = *a.steps;
    if (a.tol) {
        h.stop_rule = StopRule::Tolerance;
        h.convergence_tolerance = *a.tol;
    }
    if (a.max_iters) h.max_outer_iterations = *a.max_iters;
    if (a.fixed_iters) {
        h.stop_rule = StopRule::FixedIterations;
        h.max_outer_iterations = *a.fixed_iters;
    }
    if (!a.scaling.empty()) {
        auto s = parse_feature_scaling(a.scaling);
        if (!s) throw Error(ErrorCode::InvalidArgument, "unknown scaling '" + a.scaling + "' (none, unit-l2)");
        v.scaling = *s;
    }
    h.validate();
    return v;
}

std::vector<SampleResult> grade_all(const Grader& grader, const LabeledSamples& tests, const MethodVariant& v,
                                    int jobs) {
    const Index n = tests.size();
    std::vector<SampleResult> results(static_cast<std::size_t>(n));
    std::vector<std::optional<std::string>> failures(static_cast<std::size_t>(n));
    std::atomic<Index> next{0};
    auto worker = [&] {
        for (Index i = next++; i < n; i = next++) {
            try {
                const VariantResult r = grader.solve(FeatureVector(tests.features.col(i)), v);
                results[static_cast<std::size_t>(i)] = {r.grade, r.coefficients.support_size(),
                                                        r.trace.iterations.size(), r.trace.converged};
            } catch (const std::exception& e) {
                failures[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<Index>(n, 1))));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (Index i = 0; i < n; ++i) {
        if (failures[static_cast<std::size_t>(i)]) throw SampleFailure{i, *failures[static_cast<std::size_t>(i)]};
    }
    return results;
}

int cmd_grade(const GradeArgs& a, std::ostream& out, std::ostream& err) {
    auto method = parse_method(a.variant);
    if (!method) {
        err << "error: unknown variant '" << a.variant << "'; valid variants: " << valid_variant_names() << '\n';
        return kUsageError;
    }
    const Task task = task_from(a.task);
    const MethodVariant variant = build_variant(a, *method, task);

    Dataset data;
    if (!a.manifest.empty()) {
        if (!a.refs.empty() || !a.tests.empty()) {
            throw Error(ErrorCode::InvalidArgument, "--manifest cannot be combined with --refs/--tests");
        }
        data = load_dataset(load_manifest(a.manifest));
    } else {
        if (a.refs.empty() || a.tests.empty()) {
            throw Error(ErrorCode::InvalidArgument, "either --manifest or both --refs and --tests are required");
        }
        data.reference = load_samples(a.refs);
        data.test = load_samples(a.tests);
    }
    const Grader grader(data.reference.to_dictionary());
    if (data.test.dimension() != grader.dictionary().dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "test features have dimension " +
                                                      std::to_string(data.test.dimension()) + ", dictionary " +
                                                      std::to_string(grader.dictionary().dimension()));
    }

    std::vector<SampleResult> results;
    try {
        results = grade_all(grader, data.test, variant, a.jobs);
    } catch (const SampleFailure& f) {
        err << "error: solver failed on sample " << f.sample << ": " << f.message << '\n';
        return kSolverFailure;
    }

    if (!a.report.empty()) {
        std::ofstream rep(a.report);
        if (!rep) throw Error(ErrorCode::IoError, "cannot write " + a.report);
        for (std::size_t i = 0; i < results.size(); ++i) {
            const nlohmann::ordered_json line = {{"sample_id", i},
                                         {"grade", results[i].grade},
                                         {"support_size", results[i].support_size},
                                         {"iterations", results[i].iterations},
                                         {"converged", results[i].converged}};
            rep << line.dump() << '\n';
        }
        if (!rep) throw Error(ErrorCode::IoError, "failed writing " + a.report);
    }
    Vector pred(static_cast<Index>(results.size()));
    for (std::size_t i = 0; i < results.size(); ++i) pred[static_cast<Index>(i)] = results[i].grade;
    if (!a.predictions.empty()) {
        std::ofstream p(a.predictions);
        if (!p) throw Error(ErrorCode::IoError, "cannot write " + a.predictions);
        p << "sample_id,grade\n";
        for (Index i = 0; i < pred.size(); ++i) p << i << ',' << exact(pred[i]) << '\n';
    }
    if (!a.csv) out << "variant " << to_string(*method) << ", task " << to_string(task) << '\n';
    print_metrics(out, task_metrics(task, data.test.grades, pred), a.csv);
    return kOk;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
    std::string truth;
    std::string pred;
    std::string task = "cdr";
    bool csv = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const Task task = task_from(a.task);
    const Vector truth = load_grades(a.truth);
    const Vector pred = load_grades(a.pred);
    print_metrics(out, task_metrics(task, truth, pred), a.csv);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Grading by sparse reconstruction over a reference dictionary", "srcl"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic reference/test benchmark");
    s->add_option("--n-ref", synth.options.n_ref, "Reference samples")->capture_default_str();
    s->add_option("--n-test", synth.options.n_test, "Test samples")->capture_default_str();
    s->add_option("--dim", synth.options.dimension, "Feature dimension (perfect square)")->capture_default_str();
    s->add_option("--noise", synth.options.noise_sigma, "i.i.d. noise sigma")->capture_default_str();
    s->add_option("--nuisance", synth.options.nuisance_fraction, "Nuisance energy fraction (0 disables)")
        ->capture_default_str();
    s->add_option("--nuisance-rank", synth.options.nuisance_rank, "Nuisance rank")->capture_default_str();
    s->add_option("--seed", synth.seed, "Seed (falls back to SRCL_SEED, then 7)");
    s->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();

    BowArgs bow;
    auto* b = app.add_subcommand("bow", "Learn a patch codebook and write bag-of-words histograms");
    b->add_option("--images", bow.images, "Directory of .pgm / .csv images")->required();
    b->add_option("--k", bow.k, "Codebook size")->capture_default_str();
    b->add_option("--patch", bow.patch, "Patch side")->capture_default_str();
    b->add_option("--max-iter", bow.max_iterations, "Lloyd iteration cap")->capture_default_str();
    b->add_option("--seed", bow.seed, "Seed (falls back to SRCL_SEED, then 7)");
    b->add_option("--labels", bow.labels, "CSV with image,grade columns; histograms get grades");
    b->add_option("--out", bow.out_dir, "Output directory")->capture_default_str();

    GradeArgs grade;
    auto* g = app.add_subcommand("grade", "Grade test samples against a reference dictionary");
    g->add_option("--variant", grade.variant, "sc, llc, sdc, ssgl, sc+rc, sdc+rc, ssgl+rc")->required();
    g->add_option("--refs", grade.refs, "Reference CSV (grade,f0,...)");
    g->add_option("--tests", grade.tests, "Test CSV (grade,f0,...)");
    g->add_option("--manifest", grade.manifest, "Dataset manifest (JSON)");
    g->add_option("--task", grade.task, "Preset: cdr or cataract")->capture_default_str();
    g->add_option("--gamma", grade.gamma, "Range-constraint weight");
    g->add_option("--lambda1", grade.lambda1, "l1 weight (SSGL, LLC)");
    g->add_option("--lambda2", grade.lambda2, "Distance weight (SDC, SSGL)");
    g->add_option("--lambda3", grade.lambda3, "Group weight (SSGL)");
    g->add_option("--steps", grade.steps, "LARS step budget");
    g->add_option("--fixed-iters", grade.fixed_iters, "Run exactly this many outer RC iterations");
    g->add_option("--tol", grade.tol, "Stop RC iterations once the grade changes less than this");
    g->add_option("--max-iters", grade.max_iters, "Outer iteration cap with --tol");
    g->add_option("--scaling", grade.scaling, "Feature scaling: none or unit-l2 (default per task)");
    g->add_option("--jobs", grade.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    g->add_option("--report", grade.report, "Per-sample JSON-lines report");
    g->add_option("--predictions", grade.predictions, "Write sample_id,grade CSV");
    g->add_flag("--csv", grade.csv, "Metrics as CSV");

    EvaluateArgs eval;
    auto* e = app.add_subcommand("evaluate", "Compare predicted grades with the truth");
    e->add_option("--truth", eval.truth, "CSV with a grade column")->required();
    e->add_option("--pred", eval.pred, "CSV with a grade column")->required();
    e->add_option("--task", eval.task, "cdr or cataract")->capture_default_str();
    e->add_flag("--csv", eval.csv, "Metrics as CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << ex.what() << '\n';
        return kUsageError;
    }

    try {
        if (s->parsed()) return cmd_synth(synth, out);
        if (b->parsed()) return cmd_bow(bow, out);
        if (g->parsed()) return cmd_grade(grade, out, err);
        return cmd_evaluate(eval, out);
    } catch (const Error& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsageError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kUsageError;
    }
}

}  // namespace srcl::cli
