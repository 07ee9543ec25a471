#include "octdn/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace octdn {
namespace {

std::string lower_ext(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

Image from_bytes(const std::vector<unsigned char>& bytes, int w, int h) {
    Image img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img(y, x) = bytes[static_cast<std::size_t>(y) * w + x] / 255.0;
    return img;
}

std::vector<unsigned char> to_bytes(const Image& img) {
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            bytes[static_cast<std::size_t>(y) * w + x] = quantize_byte(img(y, x));
    return bytes;
}

// ---- PGM (binary P5, maxval 255) ----

// Skips whitespace and '#' comment lines between header tokens.
int next_pgm_token(std::istream& in, const fs::path& path) {
    for (;;) {
        int c = in.peek();
        if (c == EOF) throw DecodeError("truncated PGM header: " + path.string());
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) throw DecodeError("malformed PGM header: " + path.string());
    return value;
}

Image load_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw DecodeError("not a binary PGM (P5): " + path.string());
    const int w = next_pgm_token(in, path);
    const int h = next_pgm_token(in, path);
    const int maxval = next_pgm_token(in, path);
    if (w < 1 || h < 1) throw DecodeError("bad PGM dimensions: " + path.string());
    if (maxval != 255)
        throw DecodeError("unsupported PGM maxval " + std::to_string(maxval) + ": " + path.string());
    in.get();  // single whitespace byte after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw DecodeError("truncated PGM data: " + path.string());
    return from_bytes(bytes, w, h);
}

void save_pgm(const Image& img, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WriteError("cannot open for writing: " + path.string());
    out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
    const auto bytes = to_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw WriteError("failed writing " + path.string());
}

// ---- PNG (8-bit grayscale only) ----

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

Image load_png(const fs::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DecodeError("cannot open " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw DecodeError("not a PNG file: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("libpng init failed: " + path.string());
    }
    std::vector<unsigned char> data;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("corrupt PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("unsupported PNG (need 8-bit grayscale): " + path.string());
    }

    data.resize(static_cast<std::size_t>(w) * h);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = data.data() + static_cast<std::size_t>(y) * w;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(data, w, h);
}

void save_png(const Image& img, const fs::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw WriteError("cannot open for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw WriteError("libpng init failed: " + path.string());
    }
    auto bytes = to_bytes(img);
    std::vector<png_bytep> rows(img.rows());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw WriteError("failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    const int w = static_cast<int>(img.cols());
    const int h = static_cast<int>(img.rows());
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<std::size_t>(y) * w;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool supported_ext(const std::string& ext) {
    return ext == ".png" || ext == ".pgm";
}

}  // namespace

Image load_image(const fs::path& path) {
    if (!fs::exists(path)) throw DecodeError("no such file: " + path.string());
    const std::string ext = lower_ext(path);
    if (ext == ".png") return load_png(path);
    if (ext == ".pgm") return load_pgm(path);
    throw DecodeError("unsupported image format '" + ext + "': " + path.string());
}

void save_image(const Image& img, const fs::path& path) {
    if (img.size() == 0) throw WriteError("refusing to write empty image: " + path.string());
    const std::string ext = lower_ext(path);
    if (ext == ".png") return save_png(img, path);
    if (ext == ".pgm") return save_pgm(img, path);
    throw WriteError("unsupported image format '" + ext + "': " + path.string());
}

Volume load_volume(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw VolumeError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (supported_ext(lower_ext(entry.path()))) files.push_back(entry.path());
    }
    if (files.empty()) throw VolumeError("no supported images in " + dir.string());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    Volume vol;
    vol.subject_id = dir.filename().string();
    for (const auto& f : files) {
        Image img = load_image(f);
        if (!vol.slices.empty() && !same_dims(vol.slices.front(), img)) {
            std::ostringstream msg;
            msg << "volume dimension mismatch in " << dir.string() << ": "
                << files.front().filename().string() << " is " << vol.slices.front().cols() << "x"
                << vol.slices.front().rows() << " but " << f.filename().string() << " is "
                << img.cols() << "x" << img.rows();
            throw VolumeError(msg.str());
        }
        vol.slices.push_back(std::move(img));
    }
    return vol;
}

void save_volume(const Volume& vol, const fs::path& dir, const std::string& extension) {
    validate_volume(vol);
    fs::create_directories(dir);
    char name[16];
    for (std::size_t i = 0; i < vol.slices.size(); ++i) {
        std::snprintf(name, sizeof(name), "%03zu", i);
        save_image(vol.slices[i], dir / (std::string(name) + extension));
    }
}

}  // namespace octdn
