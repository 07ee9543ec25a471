// Command-line front end: one subcommand per pipeline stage plus the
// end-to-end `pipeline` driver. All subcommands operate on 8-bit grayscale
// PNG/PGM files and exit nonzero with a stage-named error on failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "octdn/denoisers.hpp"
#include "octdn/ensemble.hpp"
#include "octdn/io.hpp"
#include "octdn/n2n.hpp"
#include "octdn/pipeline.hpp"
#include "octdn/postprocess.hpp"
#include "octdn/rng.hpp"
#include "octdn/self_fusion.hpp"
#include "octdn/simulate.hpp"

namespace fs = std::filesystem;
using namespace octdn;

namespace {

AlignMode parse_align(const std::string& s) {
    if (s == "none") return AlignMode::none;
    if (s == "shift") return AlignMode::integer_shift;
    throw CLI::ValidationError("--align", "must be none|shift");
}

void write_decisions(const fs::path& path, const std::vector<PatchDecision>& decisions,
                     std::size_t n_candidates) {
    std::ofstream csv(path);
    if (!csv) throw WriteError("cannot open for writing: " + path.string());
    csv << "x0,y0,k,winner";
    for (std::size_t j = 0; j < n_candidates; ++j) csv << ",score_" << j;
    csv << "\n";
    char buf[32];
    for (const PatchDecision& d : decisions) {
        csv << d.patch.x0 << ',' << d.patch.y0 << ',' << d.patch.k << ',' << d.winner;
        for (double s : d.scores) {
            std::snprintf(buf, sizeof(buf), "%.9g", s);
            csv << ',' << buf;
        }
        csv << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Self-supervised OCT B-scan denoising: self-fusion, neighbour sub-sampling "
                 "loss, multi-denoiser patch ensemble, colour scaling and quality metrics"};
    app.require_subcommand(1);
    // the bandwidth/size flags are bare --h / --w, so help is --help only
    auto add_sub = [&app](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "print help");
        return sub;
    };

    // ---- simulate ----
    auto* sim = add_sub("simulate", "Write a synthetic speckled volume with clean reference");
    std::string sim_out;
    int sim_w = 128, sim_h = 128, sim_slices = 20, sim_looks = 4, sim_jitter = 0;
    std::uint64_t sim_seed = 42;
    double sim_sigma_add = 0.0;
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--w", sim_w, "width");
    sim->add_option("--h", sim_h, "height");
    sim->add_option("--slices", sim_slices, "slice count");
    sim->add_option("--looks", sim_looks, "speckle looks L");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--sigma-add", sim_sigma_add, "additive Gaussian std");
    sim->add_option("--jitter", sim_jitter, "per-slice anatomy drift bound (px)");
    sim->callback([&] {
        SimConfig cfg;
        cfg.looks = sim_looks;
        cfg.sigma_add = sim_sigma_add;
        cfg.seed = sim_seed;
        cfg.slices = sim_slices;
        cfg.jitter = sim_jitter;
        auto [clean, vol] = make_noisy_volume(cfg, sim_w, sim_h);
        fs::create_directories(sim_out);
        save_image(clean, fs::path(sim_out) / "clean.png");
        save_volume(vol, fs::path(sim_out) / "slices");
        std::cout << "wrote " << vol.slice_count() << " slices + clean.png under " << sim_out
                  << "\n";
    });

    // ---- selffuse ----
    auto* fuse = add_sub("selffuse", "Similarity-weighted fusion of neighbouring slices");
    std::string fuse_in, fuse_out, fuse_align = "none";
    FusionConfig fuse_cfg;
    bool fuse_exclude_center = false;
    fuse->add_option("--in", fuse_in, "input volume directory")->required();
    fuse->add_option("--out", fuse_out, "output directory")->required();
    fuse->add_option("--radius", fuse_cfg.radius, "neighbour radius");
    fuse->add_option("--patch", fuse_cfg.patch, "similarity window side (odd)");
    fuse->add_option("--h", fuse_cfg.h, "weight bandwidth");
    fuse->add_option("--align", fuse_align, "none|shift");
    fuse->add_option("--max-shift", fuse_cfg.max_shift, "alignment search bound (px)");
    fuse->add_flag("--exclude-center", fuse_exclude_center, "drop the centre slice from the sum");
    fuse->callback([&] {
        fuse_cfg.align = parse_align(fuse_align);
        fuse_cfg.include_center = !fuse_exclude_center;
        const Volume vol = load_volume(fuse_in);
        save_volume(fuse_volume(vol, fuse_cfg), fuse_out);
        std::cout << "fused " << vol.slice_count() << " slices -> " << fuse_out << "\n";
    });

    // ---- n2n-loss ----
    auto* n2n = add_sub("n2n-loss", "Neighbour sub-sampling loss of a denoiser on an image");
    std::string n2n_in, n2n_spec;
    N2nConfig n2n_cfg;
    n2n->add_option("--in", n2n_in, "noisy input image")->required();
    n2n->add_option("--denoiser", n2n_spec, "denoiser spec name:key=val,...")->required();
    n2n->add_option("--gamma", n2n_cfg.gamma, "regularizer weight");
    n2n->add_option("--seed", n2n_cfg.seed, "sub-sample plan seed");
    n2n->callback([&] {
        const Image y = load_image(n2n_in);
        const DenoiserSpec spec = parse_denoiser_spec(n2n_spec);
        const SubsamplePlan plan =
            make_plan(static_cast<int>(y.cols()), static_cast<int>(y.rows()), n2n_cfg.seed);
        const N2nLoss loss =
            n2n_loss([&](const Image& img) { return denoise(spec, img); }, y, n2n_cfg, plan);
        std::printf("rec = %.12g\nreg = %.12g\ntotal = %.12g\n", loss.rec, loss.reg, loss.total);
    });

    // ---- denoise ----
    auto* den = add_sub("denoise", "Apply a single denoiser to an image");
    std::string den_in, den_out, den_spec;
    den->add_option("--in", den_in, "input image")->required();
    den->add_option("--out", den_out, "output image")->required();
    den->add_option("--denoiser", den_spec, "denoiser spec name:key=val,...")->required();
    den->callback([&] {
        save_image(denoise(parse_denoiser_spec(den_spec), load_image(den_in)), den_out);
    });

    // ---- denoisers ----
    auto* reg = add_sub("denoisers", "List available denoisers and their parameters");
    reg->callback([&] {
        for (const DenoiserInfo& d : registry()) {
            std::cout << d.name;
            for (const ParamSchema& p : d.params)
                std::cout << " " << p.key << "=" << p.default_value;
            std::cout << "\n";
        }
    });

    // ---- ensemble ----
    auto* ens = add_sub("ensemble", "Patch-based selection ensemble of candidate images");
    std::string ens_noisy, ens_out, ens_decisions;
    std::vector<std::string> ens_cands;
    EnsembleConfig ens_cfg;
    ens->add_option("--noisy", ens_noisy, "noisy reference image")->required();
    ens->add_option("--cand", ens_cands, "candidate images")->required()->expected(-1);
    ens->add_option("--out", ens_out, "output image")->required();
    ens->add_option("--k", ens_cfg.k, "patch side");
    ens->add_option("--stride", ens_cfg.stride, "patch stride");
    ens->add_option("--w-cnr", ens_cfg.weights.w_cnr, "CNR weight");
    ens->add_option("--w-msr", ens_cfg.weights.w_msr, "MSR weight");
    ens->add_option("--w-tp", ens_cfg.weights.w_tp, "TP weight");
    ens->add_option("--w-ep", ens_cfg.weights.w_ep, "EP weight");
    ens->add_option("--decisions", ens_decisions, "write per-patch decision CSV here");
    ens->callback([&] {
        const Image noisy = load_image(ens_noisy);
        std::vector<Image> cands;
        for (const std::string& c : ens_cands) cands.push_back(load_image(c));
        auto [fused, decisions] = patch_ensemble(cands, noisy, ens_cfg);
        save_image(fused, ens_out);
        if (!ens_decisions.empty()) write_decisions(ens_decisions, decisions, cands.size());
        std::cout << decisions.size() << " patches fused -> " << ens_out << "\n";
    });

    // ---- colorscale ----
    auto* cs = add_sub("colorscale", "Min-max contrast scaling of an image or directory");
    std::string cs_in, cs_out;
    cs->add_option("--in", cs_in, "input image or directory")->required();
    cs->add_option("--out", cs_out, "output image or directory")->required();
    cs->callback([&] {
        if (fs::is_directory(cs_in)) {
            Volume vol = load_volume(cs_in);
            for (Image& slice : vol.slices) slice = color_scale(slice).first;
            save_volume(vol, cs_out);
        } else {
            save_image(color_scale(load_image(cs_in)).first, cs_out);
        }
    });

    // ---- resize ----
    auto* rs = add_sub("resize", "Bilinear resize of an image or directory");
    std::string rs_in, rs_out;
    int rs_w = 256, rs_h = 256;
    rs->add_option("--in", rs_in, "input image or directory")->required();
    rs->add_option("--out", rs_out, "output image or directory")->required();
    rs->add_option("--w", rs_w, "target width");
    rs->add_option("--h", rs_h, "target height");
    rs->callback([&] {
        if (fs::is_directory(rs_in)) {
            Volume vol = load_volume(rs_in);
            for (Image& slice : vol.slices) slice = resize_to(slice, rs_w, rs_h);
            save_volume(vol, rs_out);
        } else {
            save_image(resize_to(load_image(rs_in), rs_w, rs_h), rs_out);
        }
    });

    // ---- report ----
    auto* rep = add_sub("report", "Per-slice metric CSV of a result volume vs its noisy input");
    std::string rep_noisy, rep_result, rep_out, rep_method = "result";
    rep->add_option("--noisy", rep_noisy, "noisy volume directory")->required();
    rep->add_option("--result", rep_result, "denoised volume directory")->required();
    rep->add_option("--out", rep_out, "CSV path")->required();
    rep->add_option("--method", rep_method, "method label for the CSV");
    rep->callback([&] { report(load_volume(rep_noisy), load_volume(rep_result), rep_out, rep_method); });

    // ---- pipeline ----
    auto* pipe = add_sub("pipeline", "Two-phase denoising run with manifest");
    std::string pipe_config, pipe_manifest, pipe_in, pipe_out, pipe_align;
    std::vector<std::string> pipe_denoisers, pipe_grid;
    double pipe_split = -1.0;
    int pipe_fold = 0;
    std::int64_t pipe_seed = -1;
    double pipe_h = -1.0, pipe_gamma = -1.0;
    int pipe_radius = 0, pipe_patch = 0, pipe_k = 0, pipe_stride = 0;
    bool pipe_emit = false;
    pipe->add_option("--config", pipe_config, "key = value config file");
    pipe->add_option("--manifest", pipe_manifest, "re-run from a previous run's manifest");
    pipe->add_option("--in", pipe_in, "input directory (overrides config)");
    pipe->add_option("--out", pipe_out, "output directory (overrides config)");
    pipe->add_option("--denoiser", pipe_denoisers, "phase-2 denoiser spec (repeatable)");
    pipe->add_option("--phase1-grid", pipe_grid, "phase-1 candidate spec (repeatable)");
    pipe->add_option("--seed", pipe_seed, "run seed");
    pipe->add_option("--radius", pipe_radius, "fusion neighbour radius");
    pipe->add_option("--patch", pipe_patch, "fusion similarity window side");
    pipe->add_option("--h", pipe_h, "fusion weight bandwidth");
    pipe->add_option("--align", pipe_align, "fusion alignment none|shift");
    pipe->add_option("--gamma", pipe_gamma, "n2n regularizer weight");
    pipe->add_option("--k", pipe_k, "ensemble patch side");
    pipe->add_option("--stride", pipe_stride, "ensemble stride");
    pipe->add_option("--split", pipe_split, "train fraction for subject partitioning");
    pipe->add_option("--fold", pipe_fold, "evaluation fold (1 or 2)");
    pipe->add_flag("--emit-intermediates", pipe_emit, "write fused/ and pseudo/ volumes");
    pipe->callback([&] {
        PipelineConfig cfg;
        if (!pipe_config.empty() && !pipe_manifest.empty())
            throw PipelineError("give either --config or --manifest, not both");
        if (!pipe_config.empty()) cfg = config_from_keyvalues(read_keyvalue_file(pipe_config));
        if (!pipe_manifest.empty()) cfg = config_from_keyvalues(read_keyvalue_file(pipe_manifest));
        if (!pipe_in.empty()) cfg.input_dir = pipe_in;
        if (!pipe_out.empty()) cfg.output_dir = pipe_out;
        if (!pipe_denoisers.empty()) {
            cfg.denoisers.clear();
            for (const std::string& s : pipe_denoisers) cfg.denoisers.push_back(parse_denoiser_spec(s));
        }
        if (!pipe_grid.empty()) {
            cfg.phase1_grid.clear();
            for (const std::string& s : pipe_grid) cfg.phase1_grid.push_back(parse_denoiser_spec(s));
        }
        if (pipe_seed >= 0) cfg.seed = static_cast<std::uint64_t>(pipe_seed);
        if (pipe_radius > 0) cfg.fusion.radius = pipe_radius;
        if (pipe_patch > 0) cfg.fusion.patch = pipe_patch;
        if (pipe_h > 0.0) cfg.fusion.h = pipe_h;
        if (!pipe_align.empty()) cfg.fusion.align = parse_align(pipe_align);
        if (pipe_gamma >= 0.0) cfg.n2n.gamma = pipe_gamma;
        if (pipe_k > 0) cfg.ensemble.k = pipe_k;
        if (pipe_stride > 0) cfg.ensemble.stride = pipe_stride;
        if (pipe_split > 0.0) cfg.split = pipe_split;
        if (pipe_fold > 0) cfg.fold = pipe_fold;
        if (pipe_emit) cfg.emit_intermediates = true;
        const RunSummary sum = run_pipeline(cfg);
        std::cout << "processed " << sum.subjects.size() << " subject(s); manifest at "
                  << sum.manifest_path << "\n";
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
