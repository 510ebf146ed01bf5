#include "srcl/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace srcl {

GrayImage::GrayImage(Matrix pixels) : pixels_(std::move(pixels)) {
    if (pixels_.rows() < 3 || pixels_.cols() < 3) {
        throw Error(ErrorCode::InvalidImage, "image must be at least 3x3, got " +
                                                 std::to_string(pixels_.rows()) + "x" +
                                                 std::to_string(pixels_.cols()));
    }
    if (!pixels_.allFinite() || (pixels_.array() < 0.0).any() || (pixels_.array() > 1.0).any()) {
        throw Error(ErrorCode::InvalidImage, "pixel values must lie in [0, 1]");
    }
}

FeatureVector resize_flatten(const GrayImage& img, Index side) {
    if (side < 1) throw Error(ErrorCode::InvalidArgument, "resize side must be >= 1");
    const Matrix& src = img.pixels();
    const Index h = img.height();
    const Index w = img.width();
    const double sy = static_cast<double>(h) / static_cast<double>(side);
    const double sx = static_cast<double>(w) / static_cast<double>(side);

    auto sample_axis = [](Index dst, double scale, Index len, Index& i0, Index& i1, double& frac) {
        double pos = (static_cast<double>(dst) + 0.5) * scale - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(len - 1));
        i0 = static_cast<Index>(std::floor(pos));
        i1 = std::min(i0 + 1, len - 1);
        frac = pos - static_cast<double>(i0);
    };

    Vector out(side * side);
    for (Index r = 0; r < side; ++r) {
        Index r0, r1;
        double fr;
        sample_axis(r, sy, h, r0, r1, fr);
        for (Index c = 0; c < side; ++c) {
            Index c0, c1;
            double fc;
            sample_axis(c, sx, w, c0, c1, fc);
            const double top = (1.0 - fc) * src(r0, c0) + fc * src(r0, c1);
            const double bottom = (1.0 - fc) * src(r1, c0) + fc * src(r1, c1);
            out[r * side + c] = (1.0 - fr) * top + fr * bottom;
        }
    }
    return FeatureVector(std::move(out));
}

Index patch_stride(Index patch_size) { return (patch_size + 1) / 2; }

Index patch_count(Index height, Index width, Index patch_size) {
    if (patch_size < 1 || height < patch_size || width < patch_size) return 0;
    const Index stride = patch_stride(patch_size);
    return ((height - patch_size) / stride + 1) * ((width - patch_size) / stride + 1);
}

Matrix extract_patches(const GrayImage& img, Index patch_size) {
    if (patch_size < 1) throw Error(ErrorCode::InvalidArgument, "patch size must be >= 1");
    if (img.height() < patch_size || img.width() < patch_size) {
        throw Error(ErrorCode::ImageSmallerThanPatch, "image is smaller than a " + std::to_string(patch_size) +
                                                          "x" + std::to_string(patch_size) + " patch");
    }
    const Index stride = patch_stride(patch_size);
    Matrix patches(patch_size * patch_size, patch_count(img.height(), img.width(), patch_size));
    Index col = 0;
    for (Index r = 0; r + patch_size <= img.height(); r += stride) {
        for (Index c = 0; c + patch_size <= img.width(); c += stride) {
            for (Index i = 0; i < patch_size; ++i) {
                for (Index j = 0; j < patch_size; ++j) {
                    patches(i * patch_size + j, col) = img.pixels()(r + i, c + j);
                }
            }
            ++col;
        }
    }
    return patches;
}

Codebook::Codebook(Matrix centroids, Index patch_size)
    : centroids_(std::move(centroids)), patch_size_(patch_size) {
    if (patch_size_ < 1 || centroids_.rows() != patch_size_ * patch_size_) {
        throw Error(ErrorCode::DimensionMismatch, "centroid length must equal patch_size^2");
    }
    if (centroids_.cols() < 2) throw Error(ErrorCode::InvalidArgument, "codebook needs k >= 2 centroids");
    if (!centroids_.allFinite()) throw Error(ErrorCode::NonFiniteData, "codebook has non-finite centroids");
    for (Index a = 0; a < centroids_.cols(); ++a) {
        for (Index b = a + 1; b < centroids_.cols(); ++b) {
            if (centroids_.col(a) == centroids_.col(b)) {
                throw Error(ErrorCode::InvalidArgument, "codebook centroids must be pairwise distinct");
            }
        }
    }
}

namespace {

Index nearest_column(const Matrix& centroids, const Eigen::Ref<const Vector>& patch) {
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < centroids.cols(); ++j) {
        const double d = (centroids.col(j) - patch).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = j;
        }
    }
    return best;
}

}  // namespace

Index Codebook::nearest(const Eigen::Ref<const Vector>& patch) const {
    return nearest_column(centroids_, patch);
}

Codebook build_codebook(const Matrix& patches, Index k, std::uint64_t seed, Index patch_size,
                        const KMeansOptions& options) {
    const Index count = patches.cols();
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "k must be >= 2");
    if (count < k) {
        throw Error(ErrorCode::TooFewPatches,
                    "need at least k=" + std::to_string(k) + " patches, got " + std::to_string(count));
    }
    if (patches.rows() != patch_size * patch_size) {
        throw Error(ErrorCode::DimensionMismatch, "patch length must equal patch_size^2");
    }

    std::mt19937_64 rng(seed);
    Matrix centroids(patches.rows(), k);

    // k-means++ seeding: first centre uniform, then proportional to squared distance.
    std::uniform_int_distribution<Index> pick(0, count - 1);
    centroids.col(0) = patches.col(pick(rng));
    Vector nearest_sq(count);
    for (Index i = 0; i < count; ++i) nearest_sq[i] = (patches.col(i) - centroids.col(0)).squaredNorm();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Index c = 1; c < k; ++c) {
        const double total = nearest_sq.sum();
        if (!(total > 0.0)) {
            throw Error(ErrorCode::TooFewPatches,
                        "fewer than k=" + std::to_string(k) + " distinct patches");
        }
        const double target = unit(rng) * total;
        double acc = 0.0;
        Index chosen = -1;
        for (Index i = 0; i < count; ++i) {
            if (nearest_sq[i] <= 0.0) continue;
            acc += nearest_sq[i];
            chosen = i;
            if (acc >= target) break;
        }
        centroids.col(c) = patches.col(chosen);
        for (Index i = 0; i < count; ++i) {
            nearest_sq[i] = std::min(nearest_sq[i], (patches.col(i) - centroids.col(c)).squaredNorm());
        }
    }

    std::vector<Index> assignment(static_cast<std::size_t>(count), -1);
    for (int it = 0; it < options.max_iterations; ++it) {
        bool changed = false;
        for (Index i = 0; i < count; ++i) {
            const Index a = nearest_column(centroids, patches.col(i));
            if (assignment[static_cast<std::size_t>(i)] != a) {
                assignment[static_cast<std::size_t>(i)] = a;
                changed = true;
            }
        }
        if (!changed) break;
        Matrix sums = Matrix::Zero(patches.rows(), k);
        std::vector<Index> members(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < count; ++i) {
            const Index a = assignment[static_cast<std::size_t>(i)];
            sums.col(a) += patches.col(i);
            ++members[static_cast<std::size_t>(a)];
        }
        for (Index c = 0; c < k; ++c) {
            // Empty clusters keep their previous centre.
            if (members[static_cast<std::size_t>(c)] > 0) {
                centroids.col(c) = sums.col(c) / static_cast<double>(members[static_cast<std::size_t>(c)]);
            }
        }
    }
    return Codebook(std::move(centroids), patch_size);
}

FeatureVector bow_histogram(const GrayImage& img, const Codebook& codebook) {
    const Matrix patches = extract_patches(img, codebook.patch_size());
    Vector hist = Vector::Zero(codebook.size());
    for (Index i = 0; i < patches.cols(); ++i) hist[codebook.nearest(patches.col(i))] += 1.0;
    hist /= static_cast<double>(patches.cols());
    return FeatureVector(std::move(hist));
}

}  // namespace srcl
