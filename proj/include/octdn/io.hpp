#pragma once

// 8-bit grayscale image I/O (PNG and binary PGM) and directory-backed
// volumes. Loaded intensities are byte/255; saved bytes are
// round(clamp(v,0,1)*255) with ties rounding up.

#include <filesystem>
#include <string>

#include "octdn/image.hpp"

namespace octdn {

Image load_image(const std::filesystem::path& path);
void save_image(const Image& img, const std::filesystem::path& path);

/// Loads every supported image in `dir`, ordered by lexicographic filename.
/// subject_id is the directory name.
Volume load_volume(const std::filesystem::path& dir);

/// Writes slices as zero-padded `000.png`, `001.png`, ... (or .pgm).
void save_volume(const Volume& vol, const std::filesystem::path& dir,
                 const std::string& extension = ".png");

/// Exact byte a [0,1] intensity quantizes to (round-half-up).
inline unsigned char quantize_byte(double v) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

}  // namespace octdn
