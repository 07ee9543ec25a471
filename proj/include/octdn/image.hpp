#pragma once

// Dense image/volume types and patch geometry shared by every stage.
// Images are row-major 2-D intensity arrays with a canonical [0,1] range;
// a volume is an ordered stack of equally sized slices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "octdn/errors.hpp"

namespace octdn {

template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Image = ImageT<double>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct VolumeT {
    std::vector<ImageT<Scalar>> slices;
    std::string subject_id;

    int width() const { return slices.empty() ? 0 : static_cast<int>(slices.front().cols()); }
    int height() const { return slices.empty() ? 0 : static_cast<int>(slices.front().rows()); }
    int slice_count() const { return static_cast<int>(slices.size()); }
};

using Volume = VolumeT<double>;

/// Axis-aligned square window; (x0,y0) is the top-left pixel, k the side length.
struct PatchRef {
    int x0 = 0;
    int y0 = 0;
    int k = 0;

    bool inside(int width, int height) const {
        return x0 >= 0 && y0 >= 0 && k >= 1 && x0 + k <= width && y0 + k <= height;
    }
};

/// General axis-aligned rectangle, used for metric ROIs.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    bool inside(int width, int height) const {
        return x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x0 + w <= width && y0 + h <= height;
    }
};

template <typename Scalar>
bool same_dims(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename Scalar>
void validate_volume(const VolumeT<Scalar>& vol) {
    if (vol.slices.empty()) throw VolumeError("volume has no slices");
    for (std::size_t i = 1; i < vol.slices.size(); ++i) {
        if (!same_dims(vol.slices[0], vol.slices[i]))
            throw VolumeError("volume slice " + std::to_string(i) + " dimension mismatch");
    }
}

/// Overlapping patch positions covering the full w x h pixel grid.
/// Starts run at multiples of `stride`; the final start on each axis is
/// clamped to dim-k so no patch leaves the image and every pixel is covered.
inline std::vector<PatchRef> patch_grid(int w, int h, int k, int stride) {
    if (k < 1 || k > std::min(w, h))
        throw GeometryError("patch side " + std::to_string(k) + " exceeds image dims " +
                            std::to_string(w) + "x" + std::to_string(h));
    if (stride < 1) throw GeometryError("stride must be >= 1");

    auto starts = [&](int dim) {
        std::vector<int> s;
        const int last = dim - k;
        for (int p = 0; p <= last; p += stride) s.push_back(p);
        if (s.back() != last) s.push_back(last);
        return s;
    };

    const std::vector<int> xs = starts(w);
    const std::vector<int> ys = starts(h);
    std::vector<PatchRef> grid;
    grid.reserve(xs.size() * ys.size());
    for (int y : ys)
        for (int x : xs) grid.push_back({x, y, k});
    return grid;
}

/// Bilinear resize with half-pixel-centre sampling. Same-size input is
/// returned unchanged so the identity case is exact.
template <typename Scalar>
ImageT<Scalar> resize_to(const ImageT<Scalar>& img, int w, int h) {
    if (w < 1 || h < 1) throw GeometryError("resize target must be >= 1x1");
    const int iw = static_cast<int>(img.cols());
    const int ih = static_cast<int>(img.rows());
    if (w == iw && h == ih) return img;

    ImageT<Scalar> out(h, w);
    const double sx = static_cast<double>(iw) / w;
    const double sy = static_cast<double>(ih) / h;
    for (int y = 0; y < h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(ih - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, ih - 1);
        const double wy = fy - y0;
        for (int x = 0; x < w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(iw - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, iw - 1);
            const double wx = fx - x0;
            const double top = img(y0, x0) * (1.0 - wx) + img(y0, x1) * wx;
            const double bot = img(y1, x0) * (1.0 - wx) + img(y1, x1) * wx;
            out(y, x) = static_cast<Scalar>(top * (1.0 - wy) + bot * wy);
        }
    }
    return out;
}

template <typename Scalar>
ImageT<Scalar> crop(const ImageT<Scalar>& img, const PatchRef& p) {
    if (!p.inside(static_cast<int>(img.cols()), static_cast<int>(img.rows())))
        throw GeometryError("patch outside image");
    return img.block(p.y0, p.x0, p.k, p.k);
}

template <typename Scalar>
double mse(const ImageT<Scalar>& a, const ImageT<Scalar>& b) {
    if (!same_dims(a, b)) throw ShapeError("mse: dimension mismatch");
    return (a - b).square().mean();
}

/// Translate by integer (dx,dy); exposed pixels are zero-filled.
template <typename Scalar>
ImageT<Scalar> shift_image(const ImageT<Scalar>& img, int dx, int dy) {
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    ImageT<Scalar> out = ImageT<Scalar>::Zero(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = y - dy;
        if (sy < 0 || sy >= h) continue;
        for (int x = 0; x < w; ++x) {
            const int sx = x - dx;
            if (sx < 0 || sx >= w) continue;
            out(y, x) = img(sy, sx);
        }
    }
    return out;
}

}  // namespace octdn
