#pragma once

// Named, parameterized Image -> Image denoisers. A DenoiserSpec is pure
// configuration: the same (name, params) always produces the same function.
// Outputs preserve dimensions and are clamped to [0,1].

#include <string>
#include <utility>
#include <vector>

#include "octdn/image.hpp"

namespace octdn {

struct DenoiserSpec {
    std::string name;
    std::vector<std::pair<std::string, double>> params;  // insertion-ordered

    bool has(const std::string& key) const;
    double get(const std::string& key, double fallback) const;
    /// Canonical `name:key=val,...` form (params in given order).
    std::string to_string() const;
};

struct ParamSchema {
    std::string key;
    double default_value;
    std::string doc;
};

struct DenoiserInfo {
    std::string name;
    std::vector<ParamSchema> params;
};

/// Stable, sorted listing of the built-in denoisers and their parameters.
std::vector<DenoiserInfo> registry();

/// Parses `name` or `name:key=val,key=val`. Unknown names/keys and malformed
/// values raise SpecError.
DenoiserSpec parse_denoiser_spec(const std::string& text);

/// Applies the configured denoiser. Unknown name or invalid parameter values
/// raise SpecError.
Image denoise(const DenoiserSpec& spec, const Image& img);

}  // namespace octdn
