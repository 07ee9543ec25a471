#pragma once

// Seeded synthetic data: layered retina-like phantoms and multiplicative
// L-look speckle (Gamma(L, 1/L), unit mean, variance 1/L) with optional
// additive Gaussian noise, so denoising claims can be checked against a
// known clean image.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "octdn/image.hpp"
#include "octdn/rng.hpp"

namespace octdn {

struct SimConfig {
    int looks = 4;            // speckle looks L (>= 1)
    double sigma_add = 0.0;   // additive Gaussian std, intensity units
    std::uint64_t seed = 0;
    int slices = 1;
    int jitter = 0;           // per-slice anatomy drift bound, pixels

    void validate() const {
        if (looks < 1) throw SpecError("looks must be >= 1");
        if (sigma_add < 0.0) throw SpecError("sigma_add must be >= 0");
        if (slices < 1) throw SpecError("slices must be >= 1");
        if (jitter < 0) throw SpecError("jitter must be >= 0");
    }
};

struct PhantomInfo {
    int bands = 0;
    std::vector<double> levels;  // band mean intensity, top to bottom
};

namespace detail {

// Integer translate with edge replication (anatomy drift, no black borders).
inline Image shift_replicate(const Image& img, int dx, int dy) {
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    Image out(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = std::clamp(y - dy, 0, h - 1);
        for (int x = 0; x < w; ++x) out(y, x) = img(sy, std::clamp(x - dx, 0, w - 1));
    }
    return out;
}

}  // namespace detail

/// Layered phantom: 5-9 horizontal bands of distinct mean intensity with
/// sinusoidal boundary undulation and a few percent of smooth in-band
/// intensity modulation. Deterministic per seed; values stay in [0.05,0.95].
inline Image make_phantom(int w, int h, std::uint64_t seed, PhantomInfo* info = nullptr) {
    if (w < 32 || h < 32) throw GeometryError("phantom needs at least 32x32");
    std::mt19937_64 rng(mix_seed(seed, 0x70686E74ull));
    std::uniform_int_distribution<int> band_count(5, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int bands = band_count(rng);
    std::vector<double> levels(bands);
    for (int k = 0; k < bands; ++k)
        levels[k] = 0.06 + (0.90 - 0.06) * static_cast<double>(k) / (bands - 1);
    std::shuffle(levels.begin(), levels.end(), rng);

    // Undulating band boundaries; amplitude < spacing/2 keeps them ordered.
    const double spacing = static_cast<double>(h) / bands;
    struct Wave {
        double amp, freq, phase;
    };
    std::vector<Wave> bounds(bands - 1);
    for (auto& b : bounds) {
        b.amp = spacing * (0.10 + 0.30 * unit(rng));
        b.freq = 1.0 + 2.0 * unit(rng);
        b.phase = 2.0 * std::numbers::pi * unit(rng);
    }
    // Smooth multiplicative texture per band, a few percent.
    struct Texture {
        double fx, px, fy, py;
    };
    std::vector<Texture> tex(bands);
    for (auto& t : tex) {
        t.fx = 1.0 + 3.0 * unit(rng);
        t.px = 2.0 * std::numbers::pi * unit(rng);
        t.fy = 1.0 + 3.0 * unit(rng);
        t.py = 2.0 * std::numbers::pi * unit(rng);
    }

    Image img(h, w);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            int band = 0;
            while (band < bands - 1) {
                const Wave& b = bounds[band];
                const double edge = spacing * (band + 1) +
                                    b.amp * std::sin(2.0 * std::numbers::pi * b.freq * x / w + b.phase);
                if (y < edge) break;
                ++band;
            }
            const Texture& t = tex[band];
            const double mod = 0.02 * std::sin(2.0 * std::numbers::pi * t.fx * x / w + t.px) +
                               0.02 * std::sin(2.0 * std::numbers::pi * t.fy * y / h + t.py);
            img(y, x) = levels[band] * (1.0 + mod);
        }
    }
    if (info) {
        info->bands = bands;
        info->levels = levels;
    }
    return img;
}

/// y = clamp(x*n + e, 0, 1), n ~ Gamma(L, 1/L) i.i.d. per pixel, e ~
/// N(0, sigma_add^2). The stream is derived from (seed, slice_index).
inline Image add_speckle(const Image& clean, const SimConfig& cfg, int slice_index) {
    cfg.validate();
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x73706B00ull + static_cast<std::uint64_t>(slice_index)));
    std::gamma_distribution<double> gamma(static_cast<double>(cfg.looks), 1.0 / cfg.looks);
    std::normal_distribution<double> gauss(0.0, cfg.sigma_add > 0.0 ? cfg.sigma_add : 1.0);

    Image out(clean.rows(), clean.cols());
    for (Eigen::Index y = 0; y < clean.rows(); ++y)
        for (Eigen::Index x = 0; x < clean.cols(); ++x) {
            double v = clean(y, x) * gamma(rng);
            if (cfg.sigma_add > 0.0) v += gauss(rng);
            out(y, x) = std::clamp(v, 0.0, 1.0);
        }
    return out;
}

/// Phantom plus cfg.slices i.i.d. speckle realizations (optionally jittered).
inline std::pair<Image, Volume> make_noisy_volume(const SimConfig& cfg, int w, int h) {
    cfg.validate();
    const Image clean = make_phantom(w, h, cfg.seed);
    Volume vol;
    vol.subject_id = "sim-" + std::to_string(cfg.seed);
    vol.slices.reserve(cfg.slices);
    std::mt19937_64 jrng(mix_seed(cfg.seed, 0x6A697474ull));
    std::uniform_int_distribution<int> jdist(-cfg.jitter, cfg.jitter);
    for (int s = 0; s < cfg.slices; ++s) {
        Image base = clean;
        if (cfg.jitter > 0) {
            const int dx = jdist(jrng);
            const int dy = jdist(jrng);
            base = detail::shift_replicate(clean, dx, dy);
        }
        vol.slices.push_back(add_speckle(base, cfg, s));
    }
    return {clean, std::move(vol)};
}

}  // namespace octdn
