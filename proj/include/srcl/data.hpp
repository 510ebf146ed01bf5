#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srcl/core.hpp"
#include "srcl/features.hpp"

namespace srcl {

enum class FeatureKind { RawVector, ImageResize, BagOfWords };

std::string to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

/// Run configuration: where the reference (dictionary) and test samples live and how to
/// turn them into feature vectors. Stored as JSON.
struct DatasetManifest {
    std::filesystem::path reference_path;
    std::filesystem::path test_path;
    FeatureKind feature_kind = FeatureKind::RawVector;
    std::string grade_column = "grade";
    std::uint64_t seed = 0;
    /// ImageResize: output side length.
    Index resize_side = 50;
    /// BagOfWords: codebook file written by `srcl bow`.
    std::optional<std::filesystem::path> codebook_path;

    void validate() const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Samples as columns with one grade each.
struct LabeledSamples {
    Matrix features;
    Vector grades;

    Index size() const noexcept { return features.cols(); }
    Index dimension() const noexcept { return features.rows(); }
    Dictionary to_dictionary() const { return Dictionary(features, grades); }
};

/// CSV with a header row; one sample per row, the grade in `grade_column`, every
/// other column a feature in file order.
LabeledSamples load_samples(const std::filesystem::path& path, const std::string& grade_column = "grade");
/// Just the grade column of a CSV (or its only column when there is no column by that name).
Vector load_grades(const std::filesystem::path& path, const std::string& grade_column = "grade");

/// Writes `grade,f0,...,f{m-1}` at round-trip precision.
void save_samples(const std::filesystem::path& path, const LabeledSamples& samples);

Dictionary load_dictionary(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Reference and test samples as described by the manifest, features already extracted.
struct Dataset {
    LabeledSamples reference;
    LabeledSamples test;
};
Dataset load_dataset(const DatasetManifest& manifest);

/// PGM (P2 or P5, any maxval) or a headerless CSV matrix of values in [0, 1].
GrayImage load_image(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const GrayImage& img);

void save_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook load_codebook(const std::filesystem::path& path);

struct SyntheticOptions {
    Index n_ref = 120;
    Index n_test = 200;
    Index dimension = 2500;  // must be a perfect square
    double noise_sigma = 0.05;
    /// Energy of the structured nuisance relative to the prototype (0 disables it).
    double nuisance_fraction = 0.3;
    Index nuisance_rank = 100;
    /// Width (pixels) of the logistic disc and cup edges; 0 picks max(0.75, side / 50).
    double edge_width = 0.0;
    std::uint64_t seed = 7;
};

struct SyntheticDataset {
    LabeledSamples reference;
    LabeledSamples test;
};

/// Disc-like images whose cup radius is proportional to the latent grade u ~ U[0.2, 0.9],
/// plus a low-rank vessel-like nuisance independent of u and i.i.d. Gaussian noise.
SyntheticDataset generate_synthetic(const SyntheticOptions& options);

/// Noise-free prototype image (flattened row-major) for grade u on a side x side grid.
Vector synthetic_prototype(double u, Index side, double edge_width = 0.0);

}  // namespace srcl
