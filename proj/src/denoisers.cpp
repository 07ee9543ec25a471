#include "octdn/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "octdn/filters.hpp"

namespace octdn {

bool DenoiserSpec::has(const std::string& key) const {
    return std::any_of(params.begin(), params.end(),
                       [&](const auto& kv) { return kv.first == key; });
}

double DenoiserSpec::get(const std::string& key, double fallback) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return fallback;
}

std::string DenoiserSpec::to_string() const {
    std::ostringstream out;
    out << name;
    for (std::size_t i = 0; i < params.size(); ++i) {
        out << (i == 0 ? ":" : ",") << params[i].first << "=" << params[i].second;
    }
    return out.str();
}

std::vector<DenoiserInfo> registry() {
    return {
        {"gaussian", {{"sigma", 1.0, "kernel standard deviation (>0), radius ceil(3*sigma)"}}},
        {"identity", {}},
        {"median", {{"window", 3.0, "odd window side, one of {3,5,7}"}}},
        {"nlmeans",
         {{"search", 5.0, "search window radius"},
          {"patch", 2.0, "patch radius"},
          {"h", 0.1, "weight bandwidth (>0)"}}},
    };
}

DenoiserSpec parse_denoiser_spec(const std::string& text) {
    DenoiserSpec spec;
    const auto colon = text.find(':');
    spec.name = text.substr(0, colon);
    if (spec.name.empty()) throw SpecError("empty denoiser name in '" + text + "'");

    const auto reg = registry();
    const auto it = std::find_if(reg.begin(), reg.end(),
                                 [&](const DenoiserInfo& d) { return d.name == spec.name; });
    if (it == reg.end()) throw SpecError("unknown denoiser '" + spec.name + "'");

    if (colon != std::string::npos) {
        std::stringstream rest(text.substr(colon + 1));
        std::string kv;
        while (std::getline(rest, kv, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0)
                throw SpecError("malformed parameter '" + kv + "' in '" + text + "'");
            const std::string key = kv.substr(0, eq);
            const bool known = std::any_of(it->params.begin(), it->params.end(),
                                           [&](const ParamSchema& p) { return p.key == key; });
            if (!known)
                throw SpecError("unknown parameter '" + key + "' for denoiser '" + spec.name + "'");
            if (spec.has(key)) throw SpecError("duplicate parameter '" + key + "' in '" + text + "'");
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(kv.substr(eq + 1), &used);
            } catch (const std::exception&) {
                throw SpecError("bad numeric value in '" + kv + "'");
            }
            if (used != kv.size() - eq - 1) throw SpecError("bad numeric value in '" + kv + "'");
            spec.params.emplace_back(key, value);
        }
    }
    return spec;
}

Image denoise(const DenoiserSpec& spec, const Image& img) {
    Image out;
    if (spec.name == "identity") {
        out = img;
    } else if (spec.name == "median") {
        const double w = spec.get("window", 3.0);
        if (w != std::floor(w)) throw SpecError("median window must be an integer");
        out = median_filter(img, static_cast<int>(w));
    } else if (spec.name == "gaussian") {
        out = gaussian_filter(img, spec.get("sigma", 1.0));
    } else if (spec.name == "nlmeans") {
        const double s = spec.get("search", 5.0);
        const double p = spec.get("patch", 2.0);
        if (s != std::floor(s) || p != std::floor(p))
            throw SpecError("nlmeans radii must be integers");
        out = nlmeans_filter(img, static_cast<int>(s), static_cast<int>(p), spec.get("h", 0.1));
    } else {
        throw SpecError("unknown denoiser '" + spec.name + "'");
    }
    return out.min(1.0).max(0.0);
}

}  // namespace octdn
