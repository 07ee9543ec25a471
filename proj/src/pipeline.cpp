#include "octdn/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "octdn/io.hpp"
#include "octdn/metrics.hpp"
#include "octdn/postprocess.hpp"
#include "octdn/rng.hpp"

namespace fs = std::filesystem;

namespace octdn {
namespace {

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw PipelineError("config key '" + key + "' has bad numeric value '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v)) throw PipelineError("config key '" + key + "' must be an integer");
    return static_cast<long>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw PipelineError("config key '" + key + "' must be true/false");
}

}  // namespace

void PipelineConfig::validate() const {
    if (denoisers.empty()) throw PipelineError("pipeline needs at least one denoiser");
    if (!input_dir.empty() && input_dir == output_dir)
        throw PipelineError("input and output directories must differ");
    if (fold != 1 && fold != 2) throw PipelineError("fold must be 1 or 2");
    if (split && (*split <= 0.0 || *split >= 1.0))
        throw PipelineError("split must lie in (0,1)");
    fusion.validate();
    n2n.validate();
    ensemble.validate();
}

std::vector<DenoiserSpec> PipelineConfig::effective_phase1_grid() const {
    if (!phase1_grid.empty()) return phase1_grid;
    std::vector<DenoiserSpec> grid = denoisers;
    const bool has_identity = std::any_of(grid.begin(), grid.end(),
                                          [](const DenoiserSpec& d) { return d.name == "identity"; });
    if (!has_identity) grid.push_back(DenoiserSpec{"identity", {}});
    return grid;
}

Phase1Result run_phase1_detailed(const Volume& vol, const PipelineConfig& cfg) {
    cfg.validate();
    validate_volume(vol);

    Phase1Result result;
    result.fused = fuse_volume(vol, cfg.fusion);

    const int w = result.fused.width();
    const int h = result.fused.height();
    std::vector<SubsamplePlan> plans;
    plans.reserve(result.fused.slices.size());
    for (int i = 0; i < result.fused.slice_count(); ++i)
        plans.push_back(make_plan(w, h, mix_seed(cfg.n2n.seed, i)));

    const std::vector<DenoiserSpec> grid = cfg.effective_phase1_grid();
    result.grid_losses.reserve(grid.size());
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const DenoiserSpec& spec = grid[g];
        auto f = [&spec](const Image& img) { return denoise(spec, img); };
        double acc = 0.0;
        for (int i = 0; i < result.fused.slice_count(); ++i)
            acc += n2n_loss(f, result.fused.slices[i], cfg.n2n, plans[i]).total;
        result.grid_losses.push_back(acc / result.fused.slice_count());
        if (result.grid_losses[g] < result.grid_losses[best]) best = g;
    }
    result.chosen = grid[best];

    result.pseudo.subject_id = vol.subject_id;
    result.pseudo.slices.reserve(result.fused.slices.size());
    for (const Image& slice : result.fused.slices)
        result.pseudo.slices.push_back(denoise(result.chosen, slice));
    return result;
}

Volume run_phase1(const Volume& vol, const PipelineConfig& cfg) {
    return run_phase1_detailed(vol, cfg).pseudo;
}

Phase2Result run_phase2_detailed(const Volume& vol, const Volume& pseudo,
                                 const PipelineConfig& cfg) {
    cfg.validate();
    validate_volume(vol);
    validate_volume(pseudo);
    if (pseudo.slice_count() != vol.slice_count() || pseudo.width() != vol.width() ||
        pseudo.height() != vol.height())
        throw PipelineError("noisy and pseudo-clean volumes are not aligned");

    Phase2Result result;
    result.output.subject_id = vol.subject_id;
    result.output.slices.reserve(vol.slices.size());
    result.decisions.reserve(vol.slices.size());
    for (const Image& slice : vol.slices) {
        std::vector<Image> candidates;
        candidates.reserve(cfg.denoisers.size());
        for (const DenoiserSpec& spec : cfg.denoisers) candidates.push_back(denoise(spec, slice));
        auto [fusedImg, decisions] = patch_ensemble(candidates, slice, cfg.ensemble);
        auto [scaled, scale_report] = color_scale(fusedImg);
        (void)scale_report;
        result.output.slices.push_back(std::move(scaled));
        result.decisions.push_back(std::move(decisions));
    }
    return result;
}

Volume run_phase2(const Volume& vol, const Volume& pseudo, const PipelineConfig& cfg) {
    return run_phase2_detailed(vol, pseudo, cfg).output;
}

void report(const Volume& noisy, const Volume& result, const fs::path& out,
            const std::string& method, const MetricWeights& weights) {
    validate_volume(noisy);
    validate_volume(result);
    if (noisy.slice_count() != result.slice_count() || noisy.width() != result.width() ||
        noisy.height() != result.height())
        throw ShapeError("report: volumes differ in shape");

    std::ofstream csv(out);
    if (!csv) throw WriteError("cannot open for writing: " + out.string());
    csv << "subject_id,slice_index,method,cnr,msr,tp,ep,composite\n";

    struct Acc {
        double sum = 0.0;
        long n = 0;
        void add(const std::optional<double>& v) {
            if (v) {
                sum += *v;
                ++n;
            }
        }
        std::optional<double> mean() const {
            if (n == 0) return std::nullopt;
            return sum / n;
        }
    };
    Acc acc_cnr, acc_msr, acc_tp, acc_ep, acc_comp;

    for (int i = 0; i < noisy.slice_count(); ++i) {
        MetricReport rep;
        bool roi_ok = false;
        try {
            const RoiSet roi = auto_roi(noisy.slices[i]);
            rep = score_with_report(result.slices[i], noisy.slices[i], roi, weights);
            roi_ok = true;
        } catch (const RoiError&) {
            // constant noisy slice: every metric is undefined
        }
        if (roi_ok) acc_comp.add(rep.composite);
        acc_cnr.add(rep.cnr);
        acc_msr.add(rep.msr);
        acc_tp.add(rep.tp);
        acc_ep.add(rep.ep);
        csv << noisy.subject_id << ',' << i << ',' << method << ',' << metric_csv_cell(rep.cnr)
            << ',' << metric_csv_cell(rep.msr) << ',' << metric_csv_cell(rep.tp) << ','
            << metric_csv_cell(rep.ep) << ','
            << (roi_ok ? metric_csv_cell(rep.composite) : metric_csv_cell(std::nullopt)) << "\n";
    }
    csv << noisy.subject_id << ",mean," << method << ',' << metric_csv_cell(acc_cnr.mean()) << ','
        << metric_csv_cell(acc_msr.mean()) << ',' << metric_csv_cell(acc_tp.mean()) << ','
        << metric_csv_cell(acc_ep.mean()) << ',' << metric_csv_cell(acc_comp.mean()) << "\n";
    if (!csv) throw WriteError("failed writing " + out.string());
}

std::string hash_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PipelineError("cannot hash missing file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, h);
    return hex;
}

std::map<std::string, std::string> read_keyvalue_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw PipelineError("bad config line (expected key = value): '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw PipelineError("bad config line (empty key): '" + line + "'");
        kv[key] = value;
    }
    return kv;
}

PipelineConfig config_from_keyvalues(const std::map<std::string, std::string>& kv) {
    PipelineConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "input_dir") cfg.input_dir = value;
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "emit_intermediates") cfg.emit_intermediates = parse_bool(key, value);
        else if (key == "split") cfg.split = parse_double(key, value);
        else if (key == "fold") cfg.fold = static_cast<int>(parse_long(key, value));
        else if (key == "fusion.radius") cfg.fusion.radius = static_cast<int>(parse_long(key, value));
        else if (key == "fusion.patch") cfg.fusion.patch = static_cast<int>(parse_long(key, value));
        else if (key == "fusion.h") cfg.fusion.h = parse_double(key, value);
        else if (key == "fusion.include_center") cfg.fusion.include_center = parse_bool(key, value);
        else if (key == "fusion.max_shift") cfg.fusion.max_shift = static_cast<int>(parse_long(key, value));
        else if (key == "fusion.align") {
            if (value == "none") cfg.fusion.align = AlignMode::none;
            else if (value == "shift") cfg.fusion.align = AlignMode::integer_shift;
            else throw PipelineError("fusion.align must be none|shift");
        } else if (key == "n2n.gamma") cfg.n2n.gamma = parse_double(key, value);
        else if (key == "n2n.seed") cfg.n2n.seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "denoisers") {
            for (const std::string& s : split_list(value, ';'))
                cfg.denoisers.push_back(parse_denoiser_spec(s));
        } else if (key == "phase1_grid") {
            for (const std::string& s : split_list(value, ';'))
                cfg.phase1_grid.push_back(parse_denoiser_spec(s));
        } else if (key == "ensemble.k") cfg.ensemble.k = static_cast<int>(parse_long(key, value));
        else if (key == "ensemble.stride") cfg.ensemble.stride = static_cast<int>(parse_long(key, value));
        else if (key == "ensemble.w_cnr") cfg.ensemble.weights.w_cnr = parse_double(key, value);
        else if (key == "ensemble.w_msr") cfg.ensemble.weights.w_msr = parse_double(key, value);
        else if (key == "ensemble.w_tp") cfg.ensemble.weights.w_tp = parse_double(key, value);
        else if (key == "ensemble.w_ep") cfg.ensemble.weights.w_ep = parse_double(key, value);
        else if (key.rfind("chosen_denoiser", 0) == 0 || key.rfind("hash.", 0) == 0 ||
                 key == "score_reference" || key == "octdn_manifest") {
            // recorded outputs of a previous run; not configuration
        } else {
            throw PipelineError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

bool in_eval_fold(const std::string& subject_id, double split, int fold) {
    // splitmix finalizer: raw FNV high bits cluster for short similar names
    const std::uint64_t h = mix_seed(fnv1a64(subject_id.data(), subject_id.size()), 0);
    const double u = static_cast<double>(h) / static_cast<double>(std::numeric_limits<std::uint64_t>::max());
    return fold == 1 ? (u >= split) : (u < 1.0 - split);
}

namespace {

void write_decisions_csv(const fs::path& path, const std::vector<std::vector<PatchDecision>>& all,
                         std::size_t n_candidates) {
    std::ofstream csv(path);
    if (!csv) throw WriteError("cannot open for writing: " + path.string());
    csv << "slice,x0,y0,k,winner";
    for (std::size_t j = 0; j < n_candidates; ++j) csv << ",score_" << j;
    csv << "\n";
    char buf[32];
    for (std::size_t s = 0; s < all.size(); ++s) {
        for (const PatchDecision& d : all[s]) {
            csv << s << ',' << d.patch.x0 << ',' << d.patch.y0 << ',' << d.patch.k << ','
                << d.winner;
            for (double score : d.scores) {
                std::snprintf(buf, sizeof(buf), "%.9g", score);
                csv << ',' << buf;
            }
            csv << "\n";
        }
    }
    if (!csv) throw WriteError("failed writing " + path.string());
}

struct ManifestWriter {
    std::ostringstream out;

    void kv(const std::string& key, const std::string& value) {
        out << key << " = " << value << "\n";
    }
    void kv(const std::string& key, double value) { kv(key, format_double(value)); }
    void kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, bool value) { kv(key, value ? std::string("true") : std::string("false")); }
};

std::string join_specs(const std::vector<DenoiserSpec>& specs) {
    std::string out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (i) out += "; ";
        out += specs[i].to_string();
    }
    return out;
}

}  // namespace

RunSummary run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.input_dir.empty() || cfg.output_dir.empty())
        throw PipelineError("pipeline needs input_dir and output_dir");

    // A directory of images is a single subject; a directory of
    // subdirectories is a multi-subject dataset.
    std::vector<fs::path> subject_dirs;
    bool has_images = false;
    for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
        if (entry.is_directory()) subject_dirs.push_back(entry.path());
        if (entry.is_regular_file()) has_images = true;
    }
    std::sort(subject_dirs.begin(), subject_dirs.end());
    const bool multi_subject = !subject_dirs.empty() && !has_images;
    if (!multi_subject) subject_dirs = {cfg.input_dir};

    fs::create_directories(cfg.output_dir);
    RunSummary summary;
    ManifestWriter manifest;
    manifest.kv("octdn_manifest", 1);
    manifest.kv("input_dir", cfg.input_dir.string());
    manifest.kv("output_dir", cfg.output_dir.string());
    manifest.kv("seed", cfg.seed);
    manifest.kv("fusion.radius", cfg.fusion.radius);
    manifest.kv("fusion.patch", cfg.fusion.patch);
    manifest.kv("fusion.h", cfg.fusion.h);
    manifest.kv("fusion.include_center", cfg.fusion.include_center);
    manifest.kv("fusion.align",
                cfg.fusion.align == AlignMode::none ? std::string("none") : std::string("shift"));
    manifest.kv("fusion.max_shift", cfg.fusion.max_shift);
    manifest.kv("n2n.gamma", cfg.n2n.gamma);
    manifest.kv("n2n.seed", cfg.n2n.seed);
    manifest.kv("denoisers", join_specs(cfg.denoisers));
    if (!cfg.phase1_grid.empty()) manifest.kv("phase1_grid", join_specs(cfg.phase1_grid));
    manifest.kv("ensemble.k", cfg.ensemble.k);
    manifest.kv("ensemble.stride", cfg.ensemble.stride);
    manifest.kv("ensemble.w_cnr", cfg.ensemble.weights.w_cnr);
    manifest.kv("ensemble.w_msr", cfg.ensemble.weights.w_msr);
    manifest.kv("ensemble.w_tp", cfg.ensemble.weights.w_tp);
    manifest.kv("ensemble.w_ep", cfg.ensemble.weights.w_ep);
    manifest.kv("emit_intermediates", cfg.emit_intermediates);
    if (cfg.split) {
        manifest.kv("split", *cfg.split);
        manifest.kv("fold", cfg.fold);
    }
    manifest.kv("score_reference", std::string("noisy"));

    std::vector<std::pair<std::string, std::string>> hashes;  // relpath -> hash
    auto record = [&](const fs::path& p) {
        hashes.emplace_back(fs::relative(p, cfg.output_dir).string(), hash_file(p));
    };

    for (const fs::path& dir : subject_dirs) {
        Volume vol = load_volume(dir);
        if (multi_subject && cfg.split && !in_eval_fold(vol.subject_id, *cfg.split, cfg.fold))
            continue;
        summary.subjects.push_back(vol.subject_id);

        const fs::path subject_out = multi_subject ? cfg.output_dir / vol.subject_id : cfg.output_dir;
        fs::create_directories(subject_out);

        const Phase1Result p1 = run_phase1_detailed(vol, cfg);
        const Phase2Result p2 = run_phase2_detailed(vol, p1.pseudo, cfg);

        manifest.kv("chosen_denoiser." + vol.subject_id, p1.chosen.to_string());

        if (cfg.emit_intermediates) {
            save_volume(p1.fused, subject_out / "fused");
            save_volume(p1.pseudo, subject_out / "pseudo");
        }
        save_volume(p2.output, subject_out / "denoised");
        write_decisions_csv(subject_out / "decisions.csv", p2.decisions, cfg.denoisers.size());
        report(vol, p2.output, subject_out / "metrics.csv", "pipeline", cfg.ensemble.weights);

        for (int i = 0; i < p2.output.slice_count(); ++i) {
            char name[16];
            std::snprintf(name, sizeof(name), "%03d.png", i);
            record(subject_out / "denoised" / name);
        }
        record(subject_out / "decisions.csv");
        record(subject_out / "metrics.csv");
    }

    for (const auto& [rel, hash] : hashes) manifest.kv("hash." + rel, hash);

    summary.manifest_path = cfg.output_dir / "manifest.txt";
    std::ofstream mf(summary.manifest_path);
    if (!mf) throw WriteError("cannot open for writing: " + summary.manifest_path.string());
    mf << manifest.out.str();
    if (!mf) throw WriteError("failed writing " + summary.manifest_path.string());
    return summary;
}

}  // namespace octdn
