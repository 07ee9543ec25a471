#pragma once

// No-reference quality metrics used both for whole-image evaluation and for
// per-patch candidate scoring: contrast-to-noise ratio (CNR, dB),
// mean-to-standard-deviation ratio (MSR), texture preservation (TP) and edge
// preservation (EP), plus the weighted composite used by the patch ensemble.
//
// Degenerate inputs (constant regions, zero denominators) yield an
// "undefined" metric rather than an error; undefined metrics contribute 0 to
// the composite score and are reported as NA in CSV output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "octdn/image.hpp"

namespace octdn {

/// Foreground/background masks for CNR and MSR plus the rectangular ROIs
/// TP and EP are evaluated over.
struct RoiSet {
    Mask foreground;
    Mask background;
    std::vector<Rect> rois;
};

struct MetricWeights {
    double w_cnr = 3.0;
    double w_msr = 2.0;
    double w_tp = 5.0;
    double w_ep = 0.0;
};

struct MetricReport {
    std::optional<double> cnr;
    std::optional<double> msr;
    std::optional<double> tp;
    std::optional<double> ep;
    double composite = 0.0;
};

namespace detail {

struct MaskStats {
    long count = 0;
    double mean = 0.0;
    double var = 0.0;  // population variance
};

template <typename Scalar>
MaskStats mask_stats(const ImageT<Scalar>& img, const Mask& mask) {
    MaskStats s;
    double sum = 0.0;
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index y = 0; y < img.rows(); ++y)
        for (Eigen::Index x = 0; x < img.cols(); ++x)
            if (mask(y, x)) {
                const double v = img(y, x);
                sum += v;
                if (s.count == 0) {
                    lo = hi = v;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                ++s.count;
            }
    if (s.count == 0) return s;
    // constant regions have exactly zero spread; do not let rounding in the
    // mean manufacture a nonzero variance
    if (lo == hi) {
        s.mean = lo;
        s.var = 0.0;
        return s;
    }
    s.mean = sum / s.count;
    double acc = 0.0;
    for (Eigen::Index y = 0; y < img.rows(); ++y)
        for (Eigen::Index x = 0; x < img.cols(); ++x)
            if (mask(y, x)) {
                const double d = img(y, x) - s.mean;
                acc += d * d;
            }
    s.var = acc / s.count;
    return s;
}

template <typename Scalar>
MaskStats rect_stats(const ImageT<Scalar>& img, const Rect& r) {
    MaskStats s;
    s.count = static_cast<long>(r.w) * r.h;
    const auto block = img.block(r.y0, r.x0, r.h, r.w);
    const double lo = block.minCoeff();
    const double hi = block.maxCoeff();
    if (lo == hi) {
        s.mean = lo;
        s.var = 0.0;
        return s;
    }
    s.mean = block.mean();
    s.var = (block - s.mean).square().mean();
    return s;
}

// 4-neighbour Laplacian over the ROI interior (the ROI's 1-pixel border is
// excluded so every stencil read stays inside the ROI).
template <typename Scalar>
ImageT<double> roi_laplacian(const ImageT<Scalar>& img, const Rect& r) {
    ImageT<double> lap(r.h - 2, r.w - 2);
    for (int y = 1; y < r.h - 1; ++y)
        for (int x = 1; x < r.w - 1; ++x) {
            const int gy = r.y0 + y;
            const int gx = r.x0 + x;
            lap(y - 1, x - 1) = img(gy - 1, gx) + img(gy + 1, gx) + img(gy, gx - 1) +
                                img(gy, gx + 1) - 4.0 * img(gy, gx);
        }
    return lap;
}

}  // namespace detail

/// Otsu threshold over a 256-bin histogram of [0,1] intensities. Returns the
/// threshold t such that foreground = {v >= t}; smallest optimum on ties.
/// Throws RoiError when no threshold separates two nonempty classes.
template <typename Scalar>
double otsu_threshold(const ImageT<Scalar>& img) {
    long hist[256] = {0};
    const long n = static_cast<long>(img.size());
    for (Eigen::Index i = 0; i < img.size(); ++i) {
        int bin = static_cast<int>(img.data()[i] * 256.0);
        bin = std::clamp(bin, 0, 255);
        ++hist[bin];
    }
    double total_sum = 0.0;
    for (int b = 0; b < 256; ++b) total_sum += static_cast<double>(b) * hist[b];

    double best = -1.0;
    int best_t = -1;
    long count_lo = 0;
    double sum_lo = 0.0;
    for (int t = 1; t < 256; ++t) {
        count_lo += hist[t - 1];
        sum_lo += static_cast<double>(t - 1) * hist[t - 1];
        const long count_hi = n - count_lo;
        if (count_lo == 0 || count_hi == 0) continue;
        const double mu_lo = sum_lo / count_lo;
        const double mu_hi = (total_sum - sum_lo) / count_hi;
        const double between = static_cast<double>(count_lo) * static_cast<double>(count_hi) *
                               (mu_lo - mu_hi) * (mu_lo - mu_hi);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    if (best_t < 0) throw RoiError("no threshold separates two classes (constant image?)");
    return best_t / 256.0;
}

enum class ThresholdMethod { otsu };

/// Otsu split of `reference` into foreground (>= threshold) and background,
/// with the whole image as the single TP/EP ROI.
template <typename Scalar>
RoiSet auto_roi(const ImageT<Scalar>& reference, ThresholdMethod method = ThresholdMethod::otsu) {
    (void)method;  // otsu is the only method
    const double t = otsu_threshold(reference);
    RoiSet roi;
    roi.foreground = (reference >= static_cast<Scalar>(t));
    roi.background = !roi.foreground;
    roi.rois = {Rect{0, 0, static_cast<int>(reference.cols()), static_cast<int>(reference.rows())}};
    return roi;
}

/// CNR = 10 log10(|mu_f - mu_b| / sqrt(0.5 (var_f + var_b))), in dB.
/// Undefined when the pooled deviation is zero or the means coincide.
template <typename Scalar>
std::optional<double> cnr(const ImageT<Scalar>& img, const RoiSet& roi) {
    const auto fg = detail::mask_stats(img, roi.foreground);
    const auto bg = detail::mask_stats(img, roi.background);
    if (fg.count == 0 || bg.count == 0) return std::nullopt;
    const double denom = std::sqrt(0.5 * (fg.var + bg.var));
    const double num = std::abs(fg.mean - bg.mean);
    if (denom == 0.0 || num == 0.0) return std::nullopt;
    return 10.0 * std::log10(num / denom);
}

/// MSR = mu_f / sigma_f. Undefined for a constant foreground.
template <typename Scalar>
std::optional<double> msr(const ImageT<Scalar>& img, const RoiSet& roi) {
    const auto fg = detail::mask_stats(img, roi.foreground);
    if (fg.count == 0) return std::nullopt;
    const double sigma = std::sqrt(fg.var);
    if (sigma == 0.0) return std::nullopt;
    return fg.mean / sigma;
}

/// Per-ROI variance ratio of denoised to noisy scaled by sqrt of the mean
/// ratio, averaged over ROIs. Undefined when any ROI has a constant noisy
/// region or zero noisy mean.
template <typename Scalar>
std::optional<double> tp(const ImageT<Scalar>& denoised, const ImageT<Scalar>& noisy,
                         const RoiSet& roi) {
    if (!same_dims(denoised, noisy)) throw ShapeError("tp: dimension mismatch");
    if (roi.rois.empty()) return std::nullopt;
    double acc = 0.0;
    for (const Rect& r : roi.rois) {
        const auto den = detail::rect_stats(denoised, r);
        const auto in = detail::rect_stats(noisy, r);
        if (in.var == 0.0 || in.mean == 0.0) return std::nullopt;
        const double ratio = den.mean / in.mean;
        if (ratio < 0.0) return std::nullopt;
        acc += (den.var / in.var) * std::sqrt(ratio);
    }
    return acc / static_cast<double>(roi.rois.size());
}

/// Normalized correlation of mean-centred 4-neighbour Laplacians of the two
/// images, per ROI interior, averaged over ROIs. In [-1,1] when defined.
template <typename Scalar>
std::optional<double> ep(const ImageT<Scalar>& denoised, const ImageT<Scalar>& noisy,
                         const RoiSet& roi) {
    if (!same_dims(denoised, noisy)) throw ShapeError("ep: dimension mismatch");
    if (roi.rois.empty()) return std::nullopt;
    double acc = 0.0;
    for (const Rect& r : roi.rois) {
        if (r.w < 3 || r.h < 3) throw RoiError("ep: ROI smaller than 3x3 has no interior");
        ImageT<double> a = detail::roi_laplacian(denoised, r);
        ImageT<double> b = detail::roi_laplacian(noisy, r);
        a -= a.mean();
        b -= b.mean();
        const double aa = (a * a).sum();
        const double bb = (b * b).sum();
        if (aa == 0.0 || bb == 0.0) return std::nullopt;
        acc += (a * b).sum() / std::sqrt(aa * bb);
    }
    return acc / static_cast<double>(roi.rois.size());
}

/// Weighted sum of the four metrics; undefined metrics contribute 0 and stay
/// flagged (nullopt) in the returned report.
template <typename Scalar>
MetricReport score_with_report(const ImageT<Scalar>& denoised, const ImageT<Scalar>& noisy,
                               const RoiSet& roi, const MetricWeights& w) {
    MetricReport rep;
    rep.cnr = cnr(denoised, roi);
    rep.msr = msr(denoised, roi);
    rep.tp = tp(denoised, noisy, roi);
    rep.ep = ep(denoised, noisy, roi);
    rep.composite = w.w_cnr * rep.cnr.value_or(0.0) + w.w_msr * rep.msr.value_or(0.0) +
                    w.w_tp * rep.tp.value_or(0.0) + w.w_ep * rep.ep.value_or(0.0);
    return rep;
}

template <typename Scalar>
double composite_score(const ImageT<Scalar>& denoised, const ImageT<Scalar>& noisy,
                       const RoiSet& roi, const MetricWeights& w) {
    return score_with_report(denoised, noisy, roi, w).composite;
}

/// CSV cell: fixed 6-decimal value or literal NA.
inline std::string metric_csv_cell(const std::optional<double>& v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

}  // namespace octdn
