#include "srcl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

namespace srcl {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::RawVector: return "RawVector";
        case FeatureKind::ImageResize: return "ImageResize";
        case FeatureKind::BagOfWords: return "BagOfWords";
    }
    return "RawVector";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c != '_' && c != '-') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "rawvector" || key == "raw") return FeatureKind::RawVector;
    if (key == "imageresize" || key == "image") return FeatureKind::ImageResize;
    if (key == "bagofwords" || key == "bow") return FeatureKind::BagOfWords;
    return std::nullopt;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                        : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        // from_chars does not accept inf/nan spellings; let the finiteness checks reject them.
        std::string lower;
        for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (lower == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (lower == "inf" || lower == "+inf" || lower == "infinity") return std::numeric_limits<double>::infinity();
        if (lower == "-inf" || lower == "-infinity") return -std::numeric_limits<double>::infinity();
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw Error(ErrorCode::IoError, "could not format a number");
    return std::string(buf, ptr);
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

std::string location(const fs::path& path, std::size_t line, std::size_t column) {
    return path.string() + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(const fs::path& path) {
    auto in = open_input(path);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw Error(ErrorCode::ParseError, location(path, line_no, fields.size()) + ": expected " +
                                                   std::to_string(table.header.size()) + " fields, got " +
                                                   std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw Error(ErrorCode::ParseError, path.string() + ": missing header row");
    return table;
}

std::size_t find_column(const CsvTable& table, const std::string& name, const fs::path& path) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
        throw Error(ErrorCode::GradeMissing, path.string() + ": no column named '" + name + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
}

double grade_cell(const CsvTable& table, std::size_t row, std::size_t col, const fs::path& path) {
    const std::string& text = table.rows[row][col];
    if (text.empty()) {
        throw Error(ErrorCode::GradeMissing,
                    location(path, table.line_numbers[row], col + 1) + ": grade is empty (row " +
                        std::to_string(row + 1) + ")");
    }
    auto v = parse_double(text);
    if (!v) {
        throw Error(ErrorCode::ParseError, location(path, table.line_numbers[row], col + 1) +
                                               ": non-numeric grade '" + text + "' in row " +
                                               std::to_string(row + 1));
    }
    return *v;
}

}  // namespace

void DatasetManifest::validate() const {
    if (reference_path.empty() || test_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "manifest needs reference_path and test_path");
    }
    if (grade_column.empty()) throw Error(ErrorCode::InvalidArgument, "manifest grade_column is empty");
    if (feature_kind == FeatureKind::BagOfWords && !codebook_path) {
        throw Error(ErrorCode::InvalidArgument, "BagOfWords manifests need codebook_path");
    }
    if (resize_side < 1) throw Error(ErrorCode::InvalidArgument, "resize_side must be >= 1");
}

DatasetManifest load_manifest(const fs::path& path) {
    auto in = open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path q(p);
        if (q.empty()) throw Error(ErrorCode::InvalidArgument, path.string() + ": empty path entry");
        return q.is_absolute() || base.empty() ? q : base / q;
    };
    DatasetManifest m;
    try {
        m.reference_path = resolve(j.at("reference_path").get<std::string>());
        m.test_path = resolve(j.at("test_path").get<std::string>());
        if (j.contains("feature_kind")) {
            const auto kind = parse_feature_kind(j.at("feature_kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::ParseError, path.string() + ": unknown feature_kind");
            m.feature_kind = *kind;
        }
        if (j.contains("grade_column")) m.grade_column = j.at("grade_column").get<std::string>();
        if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("resize_side")) m.resize_side = j.at("resize_side").get<Index>();
        if (j.contains("codebook_path") && !j.at("codebook_path").is_null()) {
            m.codebook_path = resolve(j.at("codebook_path").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
    json j;
    j["reference_path"] = manifest.reference_path.string();
    j["test_path"] = manifest.test_path.string();
    j["feature_kind"] = to_string(manifest.feature_kind);
    j["grade_column"] = manifest.grade_column;
    j["seed"] = manifest.seed;
    j["resize_side"] = manifest.resize_side;
    j["codebook_path"] = manifest.codebook_path ? json(manifest.codebook_path->string()) : json(nullptr);
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

LabeledSamples load_samples(const fs::path& path, const std::string& grade_column) {
    const CsvTable table = read_csv(path);
    const std::size_t gcol = find_column(table, grade_column, path);
    const auto m = static_cast<Index>(table.header.size()) - 1;
    if (m < 1) throw Error(ErrorCode::ParseError, path.string() + ": no feature columns");
    LabeledSamples out;
    out.features.resize(m, static_cast<Index>(table.rows.size()));
    out.grades.resize(static_cast<Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out.grades[static_cast<Index>(r)] = grade_cell(table, r, gcol, path);
        Index f = 0;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == gcol) continue;
            auto v = parse_double(table.rows[r][c]);
            if (!v) {
                throw Error(ErrorCode::ParseError, location(path, table.line_numbers[r], c + 1) +
                                                       ": non-numeric value '" + table.rows[r][c] + "'");
            }
            out.features(f++, static_cast<Index>(r)) = *v;
        }
    }
    return out;
}

Vector load_grades(const fs::path& path, const std::string& grade_column) {
    const CsvTable table = read_csv(path);
    const bool has_named = std::find(table.header.begin(), table.header.end(), grade_column) != table.header.end();
    const std::size_t gcol = (!has_named && table.header.size() == 1) ? 0 : find_column(table, grade_column, path);
    Vector out(static_cast<Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) out[static_cast<Index>(r)] = grade_cell(table, r, gcol, path);
    return out;
}

void save_samples(const fs::path& path, const LabeledSamples& samples) {
    auto out = open_output(path);
    out << "grade";
    for (Index f = 0; f < samples.dimension(); ++f) out << ",f" << f;
    out << '\n';
    for (Index s = 0; s < samples.size(); ++s) {
        out << format_double(samples.grades[s]);
        for (Index f = 0; f < samples.dimension(); ++f) out << ',' << format_double(samples.features(f, s));
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Dictionary load_dictionary(const fs::path& path, const DatasetManifest& manifest) {
    return load_samples(path, manifest.grade_column).to_dictionary();
}

namespace {

LabeledSamples load_image_index(const fs::path& path, const DatasetManifest& manifest,
                                const std::optional<Codebook>& codebook) {
    const CsvTable table = read_csv(path);
    const std::size_t gcol = find_column(table, manifest.grade_column, path);
    // `image` plus any `image_<region>` columns; per-region features are concatenated in column order.
    std::vector<std::size_t> icols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& h = table.header[c];
        if (h == "image" || h.rfind("image_", 0) == 0) icols.push_back(c);
    }
    if (icols.empty()) {
        throw Error(ErrorCode::ParseError, path.string() + ": image index needs an 'image' column");
    }
    std::vector<Vector> features;
    Vector grades(static_cast<Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        grades[static_cast<Index>(r)] = grade_cell(table, r, gcol, path);
        std::vector<Vector> parts;
        Index length = 0;
        for (std::size_t icol : icols) {
            fs::path image_path(table.rows[r][icol]);
            if (image_path.is_relative()) image_path = path.parent_path() / image_path;
            const GrayImage img = load_image(image_path);
            parts.push_back(codebook ? bow_histogram(img, *codebook).values()
                                     : resize_flatten(img, manifest.resize_side).values());
            length += parts.back().size();
        }
        Vector joined(length);
        Index at = 0;
        for (const Vector& p : parts) {
            joined.segment(at, p.size()) = p;
            at += p.size();
        }
        features.push_back(std::move(joined));
    }
    LabeledSamples out;
    out.grades = grades;
    const Index m = features.empty() ? 0 : features.front().size();
    out.features.resize(m, static_cast<Index>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) out.features.col(static_cast<Index>(i)) = features[i];
    return out;
}

}  // namespace

Dataset load_dataset(const DatasetManifest& manifest) {
    manifest.validate();
    if (manifest.feature_kind == FeatureKind::RawVector) {
        return {load_samples(manifest.reference_path, manifest.grade_column),
                load_samples(manifest.test_path, manifest.grade_column)};
    }
    std::optional<Codebook> codebook;
    if (manifest.feature_kind == FeatureKind::BagOfWords) codebook = load_codebook(*manifest.codebook_path);
    return {load_image_index(manifest.reference_path, manifest, codebook),
            load_image_index(manifest.test_path, manifest, codebook)};
}

namespace {

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string token;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(c);
    }
    return token;
}

GrayImage load_pgm(const fs::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    const std::string magic = pgm_token(in);
    if (magic != "P2" && magic != "P5") {
        throw Error(ErrorCode::InvalidImage, path.string() + ": not a P2/P5 PGM file");
    }
    auto header_int = [&](const char* what) {
        const std::string tok = pgm_token(in);
        auto v = parse_double(tok);
        if (!v || *v < 1 || *v != std::floor(*v)) {
            throw Error(ErrorCode::InvalidImage, path.string() + ": bad " + what + " '" + tok + "'");
        }
        return static_cast<Index>(*v);
    };
    const Index width = header_int("width");
    const Index height = header_int("height");
    const Index maxval = header_int("maxval");
    if (maxval > 65535) throw Error(ErrorCode::InvalidImage, path.string() + ": maxval > 65535");
    Matrix pixels(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P2") {
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                const std::string tok = pgm_token(in);
                auto v = parse_double(tok);
                if (!v || *v < 0 || *v > maxval) {
                    throw Error(ErrorCode::InvalidImage, path.string() + ": bad pixel value '" + tok + "'");
                }
                pixels(r, c) = *v * scale;
            }
        }
    } else {
        const bool wide = maxval > 255;
        std::vector<unsigned char> raw(static_cast<std::size_t>(width * height * (wide ? 2 : 1)));
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
            throw Error(ErrorCode::InvalidImage, path.string() + ": truncated pixel data");
        }
        for (Index r = 0; r < height; ++r) {
            for (Index c = 0; c < width; ++c) {
                const auto i = static_cast<std::size_t>(r * width + c);
                const double v = wide ? raw[2 * i] * 256.0 + raw[2 * i + 1] : raw[i];
                if (v > maxval) throw Error(ErrorCode::InvalidImage, path.string() + ": pixel exceeds maxval");
                pixels(r, c) = v * scale;
            }
        }
    }
    return GrayImage(std::move(pixels));
}

GrayImage load_csv_image(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        const auto fields = split_csv(line);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto v = parse_double(fields[c]);
            if (!v) {
                throw Error(ErrorCode::ParseError,
                            location(path, line_no, c + 1) + ": non-numeric pixel '" + fields[c] + "'");
            }
            row.push_back(*v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorCode::ParseError, location(path, line_no, row.size()) + ": ragged image row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::InvalidImage, path.string() + ": empty image");
    Matrix pixels(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            pixels(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    return GrayImage(std::move(pixels));
}

}  // namespace

GrayImage load_image(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return load_pgm(path);
    if (ext == ".csv") return load_csv_image(path);
    throw Error(ErrorCode::InvalidImage, path.string() + ": unsupported image format (use .pgm or .csv)");
}

void save_pgm(const fs::path& path, const GrayImage& img) {
    auto out = open_output(path, std::ios::out | std::ios::binary);
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (Index r = 0; r < img.height(); ++r) {
        for (Index c = 0; c < img.width(); ++c) {
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(img.pixels()(r, c) * 255.0))));
        }
    }
}

void save_codebook(const fs::path& path, const Codebook& codebook) {
    json j;
    j["patch_size"] = codebook.patch_size();
    j["k"] = codebook.size();
    json cents = json::array();
    for (Index c = 0; c < codebook.size(); ++c) {
        std::vector<double> v(codebook.centroids().col(c).data(),
                              codebook.centroids().col(c).data() + codebook.centroids().rows());
        cents.push_back(v);
    }
    j["centroids"] = std::move(cents);
    auto out = open_output(path);
    out << j.dump() << '\n';
}

Codebook load_codebook(const fs::path& path) {
    auto in = open_input(path);
    try {
        json j;
        in >> j;
        const auto patch = j.at("patch_size").get<Index>();
        const auto& cents = j.at("centroids");
        Matrix centroids(patch * patch, static_cast<Index>(cents.size()));
        for (std::size_t c = 0; c < cents.size(); ++c) {
            const auto v = cents[c].get<std::vector<double>>();
            if (static_cast<Index>(v.size()) != patch * patch) {
                throw Error(ErrorCode::ParseError, path.string() + ": centroid length mismatch");
            }
            for (std::size_t i = 0; i < v.size(); ++i) centroids(static_cast<Index>(i), static_cast<Index>(c)) = v[i];
        }
        return Codebook(std::move(centroids), patch);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Index grid_side(Index dimension) {
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dimension))));
    if (dimension < 1 || side * side != dimension) {
        throw Error(ErrorCode::BadDimension, "dimension " + std::to_string(dimension) + " is not a perfect square");
    }
    return side;
}

// Thin random line segments through the disc region, one basis image per nuisance component.
Matrix vessel_basis(Index side, Index rank, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> offset(-0.35, 0.35);
    const double centre = 0.5 * static_cast<double>(side - 1);
    const double width = std::max(0.6, static_cast<double>(side) / 60.0);
    Matrix basis = Matrix::Zero(side * side, rank);
    for (Index k = 0; k < rank; ++k) {
        for (int line = 0; line < 3; ++line) {
            const double theta = angle(rng);
            const double shift = offset(rng) * static_cast<double>(side);
            const double nx = std::cos(theta);
            const double ny = std::sin(theta);
            for (Index r = 0; r < side; ++r) {
                for (Index c = 0; c < side; ++c) {
                    const double dist = (static_cast<double>(c) - centre) * nx +
                                        (static_cast<double>(r) - centre) * ny - shift;
                    basis(r * side + c, k) += std::exp(-0.5 * dist * dist / (width * width));
                }
            }
        }
        basis.col(k).normalize();
    }
    return basis;
}

}  // namespace

Vector synthetic_prototype(double u, Index side, double edge_width) {
    const double centre = 0.5 * static_cast<double>(side - 1);
    const double disc_radius = 0.4 * static_cast<double>(side);
    const double edge = edge_width > 0.0 ? edge_width : std::max(0.75, static_cast<double>(side) / 50.0);
    Vector out(side * side);
    for (Index r = 0; r < side; ++r) {
        for (Index c = 0; c < side; ++c) {
            const double dr = static_cast<double>(r) - centre;
            const double dc = static_cast<double>(c) - centre;
            const double rho = std::sqrt(dr * dr + dc * dc);
            out[r * side + c] = 0.1 + 0.4 * logistic((disc_radius - rho) / edge) +
                                0.4 * logistic((u * disc_radius - rho) / edge);
        }
    }
    return out;
}

SyntheticDataset generate_synthetic(const SyntheticOptions& options) {
    if (options.n_ref < 10) throw Error(ErrorCode::InvalidArgument, "n_ref must be >= 10");
    if (options.n_test < 1) throw Error(ErrorCode::InvalidArgument, "n_test must be >= 1");
    if (!(options.noise_sigma >= 0.0) || !(options.nuisance_fraction >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "noise_sigma and nuisance_fraction must be >= 0");
    }
    if (options.nuisance_rank < 1) throw Error(ErrorCode::InvalidArgument, "nuisance_rank must be >= 1");
    const Index side = grid_side(options.dimension);

    std::mt19937_64 rng(options.seed);
    const Matrix basis = vessel_basis(side, options.nuisance_rank, rng);
    std::uniform_real_distribution<double> grade(0.2, 0.9);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto draw = [&](Index count) {
        LabeledSamples s;
        s.features.resize(options.dimension, count);
        s.grades.resize(count);
        for (Index i = 0; i < count; ++i) {
            const double u = grade(rng);
            Vector x = synthetic_prototype(u, side, options.edge_width);
            Vector coeff(options.nuisance_rank);
            for (Index k = 0; k < options.nuisance_rank; ++k) coeff[k] = gauss(rng);
            if (options.nuisance_fraction > 0.0) {
                Vector nuisance = basis * coeff;
                const double norm = nuisance.norm();
                if (norm > 0.0) x += nuisance * (std::sqrt(options.nuisance_fraction) * x.norm() / norm);
            }
            for (Index f = 0; f < options.dimension; ++f) {
                const double e = gauss(rng);
                x[f] += options.noise_sigma * e;
            }
            s.features.col(i) = x;
            s.grades[i] = u;
        }
        return s;
    };

    SyntheticDataset out;
    out.reference = draw(options.n_ref);
    out.test = draw(options.n_test);
    return out;
}

}  // namespace srcl
