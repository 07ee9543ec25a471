#pragma once

// Min-max contrast scaling: maps the darkest pixel to 0 and the brightest
// to 1. Constant images are returned unchanged (the formula's 0/0 case).

#include <utility>

#include "octdn/image.hpp"

namespace octdn {

struct ScaleReport {
    double in_min = 0.0;
    double in_max = 0.0;
    bool applied = false;
};

template <typename Scalar>
std::pair<ImageT<Scalar>, ScaleReport> color_scale(const ImageT<Scalar>& img) {
    ScaleReport rep;
    rep.in_min = img.minCoeff();
    rep.in_max = img.maxCoeff();
    if (rep.in_min == rep.in_max) {
        rep.applied = false;
        return {img, rep};
    }
    rep.applied = true;
    const Scalar lo = static_cast<Scalar>(rep.in_min);
    const Scalar range = static_cast<Scalar>(rep.in_max - rep.in_min);
    ImageT<Scalar> out = (img - lo) / range;
    return {std::move(out), rep};
}

}  // namespace octdn
