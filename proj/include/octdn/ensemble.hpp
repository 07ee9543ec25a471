#pragma once

// Patch-based selection ensemble: slide a k x k window over the image,
// score every candidate's patch with the weighted metric composite against
// the noisy reference, keep the best patch per window, and average the
// selected patches where windows overlap. Also provides the whole-image
// pixel-mean voting baseline.

#include <vector>

#include "octdn/image.hpp"
#include "octdn/metrics.hpp"

namespace octdn {

enum class TieBreak { lowest_model_index };
enum class RoiSource { noisy_patch_otsu };

struct EnsembleConfig {
    int k = 16;
    int stride = 4;
    MetricWeights weights{};
    TieBreak tie_break = TieBreak::lowest_model_index;
    // ROI comes from an Otsu split of the noisy patch, shared by all
    // candidates; the whole patch is the single TP/EP ROI.
    RoiSource roi_source = RoiSource::noisy_patch_otsu;

    void validate() const {
        if (k < 3) throw EnsembleError("patch side k must be >= 3 (EP needs an interior)");
        if (stride < 1 || stride > k) throw EnsembleError("stride must be in [1, k]");
    }
};

struct PatchDecision {
    PatchRef patch;
    int winner = 0;
    std::vector<double> scores;
};

namespace detail {

/// ROI for scoring one window: Otsu fg/bg of the noisy patch when the split
/// leaves >= 2 pixels per class, otherwise empty masks (CNR/MSR undefined);
/// the whole patch is the single TP/EP ROI either way.
template <typename Scalar>
RoiSet patch_roi(const ImageT<Scalar>& noisy_patch) {
    RoiSet roi;
    const int k = static_cast<int>(noisy_patch.rows());
    roi.rois = {Rect{0, 0, static_cast<int>(noisy_patch.cols()), k}};
    try {
        const double t = otsu_threshold(noisy_patch);
        const Mask fg = (noisy_patch >= static_cast<Scalar>(t));
        const long nfg = fg.count();
        const long nbg = static_cast<long>(fg.size()) - nfg;
        if (nfg >= 2 && nbg >= 2) {
            roi.foreground = fg;
            roi.background = !fg;
            return roi;
        }
    } catch (const RoiError&) {
        // fall through to empty masks
    }
    roi.foreground = Mask::Constant(noisy_patch.rows(), noisy_patch.cols(), false);
    roi.background = roi.foreground;
    return roi;
}

}  // namespace detail

/// Composite score of every candidate's crop at `patch`, all scored against
/// the same ROI derived from the noisy patch.
template <typename Scalar>
std::vector<double> score_patch(const std::vector<ImageT<Scalar>>& candidates,
                                const ImageT<Scalar>& noisy, const PatchRef& patch,
                                const EnsembleConfig& cfg) {
    cfg.validate();
    if (candidates.empty()) throw EnsembleError("no candidates to score");
    for (const auto& c : candidates)
        if (!same_dims(c, noisy)) throw ShapeError("candidate/noisy dimension mismatch");

    const ImageT<Scalar> noisy_patch = crop(noisy, patch);
    const RoiSet roi = detail::patch_roi(noisy_patch);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates)
        scores.push_back(composite_score(crop(c, patch), noisy_patch, roi, cfg.weights));
    return scores;
}

/// Full sliding-window ensemble. Overlap averaging accumulates deviations
/// from the first contribution at each pixel, so pixels whose selected
/// contributions all agree reproduce that value bit-exactly.
template <typename Scalar>
std::pair<ImageT<Scalar>, std::vector<PatchDecision>> patch_ensemble(
    const std::vector<ImageT<Scalar>>& candidates, const ImageT<Scalar>& noisy,
    const EnsembleConfig& cfg) {
    cfg.validate();
    if (candidates.empty()) throw EnsembleError("no candidates to fuse");
    for (const auto& c : candidates)
        if (!same_dims(c, noisy)) throw ShapeError("candidate/noisy dimension mismatch");

    const int w = static_cast<int>(noisy.cols());
    const int h = static_cast<int>(noisy.rows());
    const std::vector<PatchRef> grid = patch_grid(w, h, cfg.k, cfg.stride);

    ImageT<Scalar> base = ImageT<Scalar>::Zero(h, w);
    ImageT<Scalar> dev = ImageT<Scalar>::Zero(h, w);
    Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> count =
        Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(h, w);

    std::vector<PatchDecision> decisions;
    decisions.reserve(grid.size());
    for (const PatchRef& p : grid) {
        PatchDecision d;
        d.patch = p;
        d.scores = score_patch(candidates, noisy, p, cfg);
        d.winner = 0;
        for (std::size_t j = 1; j < d.scores.size(); ++j)
            if (d.scores[j] > d.scores[d.winner]) d.winner = static_cast<int>(j);

        const ImageT<Scalar>& win = candidates[static_cast<std::size_t>(d.winner)];
        for (int y = p.y0; y < p.y0 + p.k; ++y)
            for (int x = p.x0; x < p.x0 + p.k; ++x) {
                const Scalar v = win(y, x);
                if (count(y, x) == 0) base(y, x) = v;
                dev(y, x) += v - base(y, x);
                ++count(y, x);
            }
        decisions.push_back(std::move(d));
    }

    ImageT<Scalar> out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out(y, x) = base(y, x) + dev(y, x) / count(y, x);
    return {std::move(out), std::move(decisions)};
}

/// Pixel-wise mean of all candidates (global voting baseline). Accumulates
/// deviations from the first candidate so a stack of identical images is
/// returned bit-exactly.
template <typename Scalar>
ImageT<Scalar> voting_ensemble(const std::vector<ImageT<Scalar>>& candidates) {
    if (candidates.empty()) throw EnsembleError("no candidates to vote");
    for (const auto& c : candidates)
        if (!same_dims(c, candidates.front())) throw ShapeError("candidate dimension mismatch");
    ImageT<Scalar> dev = ImageT<Scalar>::Zero(candidates.front().rows(), candidates.front().cols());
    for (std::size_t i = 1; i < candidates.size(); ++i) dev += candidates[i] - candidates.front();
    return candidates.front() + dev / static_cast<Scalar>(candidates.size());
}

}  // namespace octdn
