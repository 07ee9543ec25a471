#pragma once

// Classical spatial filters. Border policy is clamp-to-edge everywhere.

#include <algorithm>
#include <cmath>
#include <vector>

#include "octdn/image.hpp"

namespace octdn {

template <typename Scalar>
ImageT<Scalar> median_filter(const ImageT<Scalar>& img, int window) {
    if (window < 3 || window % 2 == 0 || window > 7)
        throw SpecError("median window must be one of {3,5,7}");
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    const int r = window / 2;
    ImageT<Scalar> out(h, w);
    std::vector<Scalar> vals;
    vals.reserve(static_cast<std::size_t>(window) * window);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            vals.clear();
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    vals.push_back(img(sy, sx));
                }
            }
            auto mid = vals.begin() + vals.size() / 2;
            std::nth_element(vals.begin(), mid, vals.end());
            out(y, x) = *mid;
        }
    }
    return out;
}

/// Normalized 1-D Gaussian taps with radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel_1d(double sigma) {
    if (sigma <= 0.0) throw SpecError("gaussian sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

template <typename Scalar>
ImageT<Scalar> gaussian_filter(const ImageT<Scalar>& img, double sigma) {
    const std::vector<double> kernel = gaussian_kernel_1d(sigma);
    const int r = static_cast<int>(kernel.size()) / 2;
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());

    ImageT<Scalar> tmp(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += kernel[d + r] * img(y, std::clamp(x + d, 0, w - 1));
            tmp(y, x) = static_cast<Scalar>(acc);
        }
    ImageT<Scalar> out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -r; d <= r; ++d) acc += kernel[d + r] * tmp(std::clamp(y + d, 0, h - 1), x);
            out(y, x) = static_cast<Scalar>(acc);
        }
    return out;
}

/// Classical non-local means: for every pixel, average the search window
/// weighted by exp(-d2/h^2) where d2 is the mean squared difference of the
/// two patches over their in-image overlap.
template <typename Scalar>
ImageT<Scalar> nlmeans_filter(const ImageT<Scalar>& img, int search_radius, int patch_radius,
                              double bandwidth) {
    if (search_radius < 1 || patch_radius < 0) throw SpecError("nlmeans radii invalid");
    if (bandwidth <= 0.0) throw SpecError("nlmeans bandwidth h must be > 0");
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    const double inv_h2 = 1.0 / (bandwidth * bandwidth);
    ImageT<Scalar> out(h, w);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double wsum = 0.0;
            double vsum = 0.0;
            const int sy0 = std::max(0, y - search_radius);
            const int sy1 = std::min(h - 1, y + search_radius);
            const int sx0 = std::max(0, x - search_radius);
            const int sx1 = std::min(w - 1, x + search_radius);
            for (int sy = sy0; sy <= sy1; ++sy) {
                for (int sx = sx0; sx <= sx1; ++sx) {
                    double d2 = 0.0;
                    int count = 0;
                    for (int py = -patch_radius; py <= patch_radius; ++py) {
                        const int ay = y + py, by = sy + py;
                        if (ay < 0 || ay >= h || by < 0 || by >= h) continue;
                        for (int px = -patch_radius; px <= patch_radius; ++px) {
                            const int ax = x + px, bx = sx + px;
                            if (ax < 0 || ax >= w || bx < 0 || bx >= w) continue;
                            const double d = img(ay, ax) - img(by, bx);
                            d2 += d * d;
                            ++count;
                        }
                    }
                    if (count > 0) d2 /= count;
                    const double wgt = std::exp(-d2 * inv_h2);
                    wsum += wgt;
                    vsum += wgt * img(sy, sx);
                }
            }
            out(y, x) = static_cast<Scalar>(vsum / wsum);
        }
    }
    return out;
}

}  // namespace octdn
