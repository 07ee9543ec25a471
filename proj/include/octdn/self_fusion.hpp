#pragma once

// Similarity-weighted fusion of neighbouring B-scans. Each slice is rebuilt
// as a per-pixel convex combination of itself (optional) and the slices
// within `radius` of it; a neighbour's weight at (x,y) decays exponentially
// with the mean squared difference over a local window, so neighbours that
// agree locally dominate the average.

#include <cmath>
#include <vector>

#include "octdn/image.hpp"

namespace octdn {

enum class AlignMode { none, integer_shift };

struct FusionConfig {
    int radius = 3;        // neighbours i-radius..i+radius (2*radius of them)
    int patch = 7;         // odd similarity-window side
    double h = 0.1;        // weight bandwidth in intensity units
    bool include_center = true;
    AlignMode align = AlignMode::none;
    int max_shift = 5;     // search bound for integer_shift alignment

    void validate() const {
        if (radius < 1) throw FusionError("fusion radius must be >= 1");
        if (patch < 3 || patch % 2 == 0) throw FusionError("fusion patch must be odd and >= 3");
        if (h <= 0.0) throw FusionError("fusion bandwidth h must be > 0");
    }
};

/// Per-contributor, per-pixel weights; weights[0] is the centre slice's field
/// when has_center, followed by one field per neighbour in input order.
/// At every pixel the fields sum to 1.
template <typename Scalar>
struct WeightFieldT {
    bool has_center = false;
    std::vector<ImageT<Scalar>> weights;
};

using WeightField = WeightFieldT<double>;

namespace detail {

// Mean of `img` over the window [x-r,x+r]x[y-r,y+r] clipped to the image,
// for every pixel, via a summed-area table.
template <typename Scalar>
ImageT<Scalar> windowed_mean(const ImageT<Scalar>& img, int r) {
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    ImageT<double> sat = ImageT<double>::Zero(h + 1, w + 1);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += img(y, x);
            sat(y + 1, x + 1) = sat(y, x + 1) + row;
        }
    }
    ImageT<Scalar> out(h, w);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r);
        const int y1 = std::min(h - 1, y + r) + 1;
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r);
            const int x1 = std::min(w - 1, x + r) + 1;
            const double sum = sat(y1, x1) - sat(y0, x1) - sat(y1, x0) + sat(y0, x0);
            out(y, x) = static_cast<Scalar>(sum / ((y1 - y0) * (x1 - x0)));
        }
    }
    return out;
}

}  // namespace detail

/// Integer translation (dx,dy) in [-max_shift,max_shift]^2 that, applied to
/// `moving`, best aligns it with `fixed` by zero-normalized cross-correlation
/// over the overlap. Ties prefer smaller |dx|+|dy|, then row-major (dy,dx).
template <typename Scalar>
std::pair<int, int> align_integer_shift(const ImageT<Scalar>& moving, const ImageT<Scalar>& fixed,
                                        int max_shift) {
    if (!same_dims(moving, fixed)) throw ShapeError("align: dimension mismatch");
    const int w = static_cast<int>(fixed.cols());
    const int h = static_cast<int>(fixed.rows());
    if (max_shift < 0 || max_shift > std::min(w, h) / 4)
        throw AlignError("max_shift out of range");
    const bool moving_const = (moving.maxCoeff() == moving.minCoeff());
    const bool fixed_const = (fixed.maxCoeff() == fixed.minCoeff());
    if (moving_const || fixed_const) throw AlignError("constant image cannot be aligned");

    double best = -2.0;
    int best_dx = 0, best_dy = 0, best_l1 = 0;
    for (int dy = -max_shift; dy <= max_shift; ++dy) {
        for (int dx = -max_shift; dx <= max_shift; ++dx) {
            // overlap of fixed with moving shifted by (dx,dy)
            const int fy0 = std::max(0, dy), fy1 = std::min(h, h + dy);
            const int fx0 = std::max(0, dx), fx1 = std::min(w, w + dx);
            const int oh = fy1 - fy0, ow = fx1 - fx0;
            if (oh < 2 || ow < 2) continue;
            auto fblk = fixed.block(fy0, fx0, oh, ow);
            auto mblk = moving.block(fy0 - dy, fx0 - dx, oh, ow);
            const double fm = fblk.mean();
            const double mm = mblk.mean();
            const ImageT<double> fc = fblk.template cast<double>() - fm;
            const ImageT<double> mc = mblk.template cast<double>() - mm;
            const double denom = std::sqrt((fc * fc).sum() * (mc * mc).sum());
            if (denom == 0.0) continue;
            const double score = (fc * mc).sum() / denom;
            const int l1 = std::abs(dx) + std::abs(dy);
            const bool better =
                score > best || (score == best && (l1 < best_l1 ||
                                                   (l1 == best_l1 && (dy < best_dy ||
                                                                      (dy == best_dy && dx < best_dx)))));
            if (better) {
                best = score;
                best_dx = dx;
                best_dy = dy;
                best_l1 = l1;
            }
        }
    }
    if (best < -1.5) throw AlignError("no valid alignment candidate");
    return {best_dx, best_dy};
}

/// Raw weight exp(-meanSSD/h^2) per neighbour from window SSD against the
/// centre slice, plus an implicit exp(0)=1 for the centre when configured,
/// normalized pixelwise to sum to 1.
template <typename Scalar>
WeightFieldT<Scalar> similarity_weights(const ImageT<Scalar>& center,
                                        const std::vector<ImageT<Scalar>>& neighbors,
                                        const FusionConfig& cfg) {
    cfg.validate();
    if (neighbors.empty() && !cfg.include_center) throw FusionError("empty fusion support");
    for (const auto& n : neighbors)
        if (!same_dims(center, n)) throw ShapeError("similarity_weights: dimension mismatch");

    const int r = (cfg.patch - 1) / 2;
    const double inv_h2 = 1.0 / (cfg.h * cfg.h);

    WeightFieldT<Scalar> field;
    field.has_center = cfg.include_center;
    if (cfg.include_center)
        field.weights.push_back(ImageT<Scalar>::Ones(center.rows(), center.cols()));
    for (const auto& n : neighbors) {
        const ImageT<Scalar> d2 = (n - center).square();
        const ImageT<Scalar> mean_ssd = detail::windowed_mean(d2, r);
        field.weights.push_back((-mean_ssd * inv_h2).exp());
    }

    ImageT<Scalar> total = ImageT<Scalar>::Zero(center.rows(), center.cols());
    for (const auto& wf : field.weights) total += wf;
    for (auto& wf : field.weights) wf /= total;
    return field;
}

/// Fuses slice i of the volume with its up-to-2*radius neighbours (window
/// truncated at volume boundaries). Optional integer-shift alignment of each
/// neighbour to the centre before weighting.
template <typename Scalar>
ImageT<Scalar> fuse_slice(const VolumeT<Scalar>& vol, int i, const FusionConfig& cfg) {
    cfg.validate();
    validate_volume(vol);
    const int n = vol.slice_count();
    if (i < 0 || i >= n) throw FusionError("slice index out of range");

    const ImageT<Scalar>& center = vol.slices[i];
    std::vector<ImageT<Scalar>> neighbors;
    for (int j = i - cfg.radius; j <= i + cfg.radius; ++j) {
        if (j == i || j < 0 || j >= n) continue;
        if (cfg.align == AlignMode::integer_shift) {
            const int w = static_cast<int>(center.cols());
            const int h = static_cast<int>(center.rows());
            const int bound = std::min({cfg.max_shift, std::min(w, h) / 4, w - 1, h - 1});
            auto [dx, dy] = align_integer_shift(vol.slices[j], center, std::max(0, bound));
            neighbors.push_back(shift_image(vol.slices[j], dx, dy));
        } else {
            neighbors.push_back(vol.slices[j]);
        }
    }
    if (neighbors.empty() && !cfg.include_center)
        throw FusionError("slice " + std::to_string(i) + " has empty fusion support");

    const WeightFieldT<Scalar> field = similarity_weights(center, neighbors, cfg);
    ImageT<Scalar> fused = ImageT<Scalar>::Zero(center.rows(), center.cols());
    std::size_t k = 0;
    if (field.has_center) fused += field.weights[k++] * center;
    for (const auto& nb : neighbors) fused += field.weights[k++] * nb;
    return fused;
}

template <typename Scalar>
VolumeT<Scalar> fuse_volume(const VolumeT<Scalar>& vol, const FusionConfig& cfg) {
    VolumeT<Scalar> out;
    out.subject_id = vol.subject_id;
    out.slices.reserve(vol.slices.size());
    for (int i = 0; i < vol.slice_count(); ++i) out.slices.push_back(fuse_slice(vol, i, cfg));
    return out;
}

}  // namespace octdn
