#pragma once

#include <cstdint>

#include "srcl/core.hpp"

namespace srcl {

/// Grayscale image with intensities in [0, 1]; at least 3x3.
class GrayImage {
public:
    explicit GrayImage(Matrix pixels);

    const Matrix& pixels() const noexcept { return pixels_; }
    Index height() const noexcept { return pixels_.rows(); }
    Index width() const noexcept { return pixels_.cols(); }

private:
    Matrix pixels_;
};

/// Bilinear resize to side x side (pixel-centre alignment, edge clamped), flattened row-major.
FeatureVector resize_flatten(const GrayImage& img, Index side = 50);

/// Stride used for half-overlapping s x s patches: ceil(s / 2).
Index patch_stride(Index patch_size);
/// Number of patches extract_patches() produces for an H x W image.
Index patch_count(Index height, Index width, Index patch_size);

/// Half-overlapping s x s patches on a regular grid; one row-major patch per column.
Matrix extract_patches(const GrayImage& img, Index patch_size = 3);

/// k patch centroids (one per column) learned by k-means.
class Codebook {
public:
    Codebook(Matrix centroids, Index patch_size);

    const Matrix& centroids() const noexcept { return centroids_; }
    Index patch_size() const noexcept { return patch_size_; }
    Index size() const noexcept { return centroids_.cols(); }
    /// Nearest centroid by Euclidean distance; ties go to the lowest index.
    Index nearest(const Eigen::Ref<const Vector>& patch) const;

private:
    Matrix centroids_;
    Index patch_size_;
};

struct KMeansOptions {
    int max_iterations = 300;
};

/// k-means++ seeding followed by Lloyd iterations until assignments stop changing.
/// Deterministic for a fixed seed.
Codebook build_codebook(const Matrix& patches, Index k, std::uint64_t seed, Index patch_size,
                        const KMeansOptions& options = {});

/// L1-normalised histogram of nearest-centroid assignments over the image's patches.
FeatureVector bow_histogram(const GrayImage& img, const Codebook& codebook);

}  // namespace srcl
