#pragma once

// Neighbour sub-sampling scheme and self-supervised loss. A plan assigns
// every 2x2 cell two distinct intra-cell offsets; gathering those pixels
// yields two half-resolution images (g1, g2) whose sources are disjoint.
// The loss of a denoiser f on a noisy image y is
//   rec = mean((f(g1(y)) - g2(y))^2)
//   reg = mean(([f(g1(y)) - g2(y)] - [g1(f(y)) - g2(f(y))])^2)
//   total = rec + gamma * reg
// with the same plan reused for sub-sampling f(y).

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "octdn/denoisers.hpp"
#include "octdn/image.hpp"

namespace octdn {

struct N2nConfig {
    double gamma = 2.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (gamma < 0.0) throw SpecError("n2n gamma must be >= 0");
    }
};

/// Intra-cell offsets: index 0..3 maps to (dy,dx) = (0,0),(0,1),(1,0),(1,1).
struct SubsamplePlan {
    int width = 0;   // image dims the plan was made for
    int height = 0;
    std::uint64_t seed = 0;
    std::vector<std::array<std::uint8_t, 2>> cells;  // row-major over cell grid

    int cells_x() const { return width / 2; }
    int cells_y() const { return height / 2; }
};

inline constexpr std::array<std::array<int, 2>, 4> kCellOffsets = {
    {{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

/// The 12 ordered pairs of distinct offsets, in lexicographic order.
inline constexpr std::array<std::array<std::uint8_t, 2>, 12> kOffsetPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 2}, {1, 3},
     {2, 0}, {2, 1}, {2, 3}, {3, 0}, {3, 1}, {3, 2}}};

/// Deterministic per-seed plan; each cell's ordered offset pair is drawn
/// uniformly from the 12 possibilities.
inline SubsamplePlan make_plan(int w, int h, std::uint64_t seed) {
    if (w < 2 || h < 2) throw GeometryError("sub-sample plan needs at least a 2x2 image");
    SubsamplePlan plan;
    plan.width = w;
    plan.height = h;
    plan.seed = seed;
    const std::size_t n = static_cast<std::size_t>(w / 2) * static_cast<std::size_t>(h / 2);
    plan.cells.reserve(n);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 11);
    for (std::size_t i = 0; i < n; ++i) plan.cells.push_back(kOffsetPairs[pick(rng)]);
    return plan;
}

/// Gathers (g1, g2): one pixel per 2x2 cell each, at the plan's offsets.
template <typename Scalar>
std::pair<ImageT<Scalar>, ImageT<Scalar>> subsample(const ImageT<Scalar>& img,
                                                    const SubsamplePlan& plan) {
    if (static_cast<int>(img.cols()) != plan.width || static_cast<int>(img.rows()) != plan.height)
        throw ShapeError("sub-sample plan dims do not match image");
    const int cw = plan.cells_x();
    const int ch = plan.cells_y();
    ImageT<Scalar> g1(ch, cw), g2(ch, cw);
    for (int cy = 0; cy < ch; ++cy) {
        for (int cx = 0; cx < cw; ++cx) {
            const auto& pair = plan.cells[static_cast<std::size_t>(cy) * cw + cx];
            const auto& o1 = kCellOffsets[pair[0]];
            const auto& o2 = kCellOffsets[pair[1]];
            g1(cy, cx) = img(2 * cy + o1[0], 2 * cx + o1[1]);
            g2(cy, cx) = img(2 * cy + o2[0], 2 * cx + o2[1]);
        }
    }
    return {std::move(g1), std::move(g2)};
}

struct N2nLoss {
    double total = 0.0;
    double rec = 0.0;
    double reg = 0.0;
};

/// Evaluates the loss of `f` on noisy image `y`. `f` must accept both full
/// and half resolution inputs.
inline N2nLoss n2n_loss(const std::function<Image(const Image&)>& f, const Image& y,
                        const N2nConfig& cfg, const SubsamplePlan& plan) {
    cfg.validate();
    const auto [g1, g2] = subsample(y, plan);
    const Image fg1 = f(g1);
    if (!same_dims(fg1, g2)) throw ShapeError("denoiser changed image dimensions");
    const Image d1 = fg1 - g2;

    const Image fy = f(y);
    if (!same_dims(fy, y)) throw ShapeError("denoiser changed image dimensions");
    const auto [h1, h2] = subsample(fy, plan);
    const Image d2 = d1 - (h1 - h2);

    N2nLoss loss;
    loss.rec = d1.square().mean();
    loss.reg = d2.square().mean();
    loss.total = loss.rec + cfg.gamma * loss.reg;
    return loss;
}

inline N2nLoss n2n_loss(const DenoiserSpec& spec, const Image& y, const N2nConfig& cfg,
                        const SubsamplePlan& plan) {
    return n2n_loss([&spec](const Image& img) { return denoise(spec, img); }, y, cfg, plan);
}

}  // namespace octdn
