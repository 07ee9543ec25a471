// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Usage:
//   octdn_acceptance <path-to-cli> <scratch-dir> <path-to-README>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "octdn/denoisers.hpp"
#include "octdn/ensemble.hpp"
#include "octdn/io.hpp"
#include "octdn/metrics.hpp"
#include "octdn/n2n.hpp"
#include "octdn/pipeline.hpp"
#include "octdn/postprocess.hpp"
#include "octdn/rng.hpp"
#include "octdn/self_fusion.hpp"
#include "octdn/simulate.hpp"
#include "oracles.hpp"

using namespace octdn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Checker {
    int failures = 0;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            detail << "    failed: " << what << "\n";
        }
    }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---- criterion 1: metric oracle equivalence, 100 seeded cases, <5 s ----
bool criterion_metric_oracles(Checker& c) {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240501);
    for (int it = 0; it < 100; ++it) {
        const Image den = oracle::random_image(16, 16, rng);
        const Image noisy = oracle::random_image(16, 16, rng);
        const RoiSet roi = oracle::random_roi(16, 16, rng);

        const auto c0 = cnr(den, roi), c1 = oracle::naive_cnr(den, roi);
        const auto m0 = msr(den, roi), m1 = oracle::naive_msr(den, roi);
        const auto t0 = tp(den, noisy, roi), t1 = oracle::naive_tp(den, noisy, roi);
        const auto e0 = ep(den, noisy, roi), e1 = oracle::naive_ep(den, noisy, roi);
        c.expect(c0.has_value() == c1.has_value(), "cnr definedness mismatch");
        c.expect(m0.has_value() == m1.has_value(), "msr definedness mismatch");
        c.expect(t0.has_value() == t1.has_value(), "tp definedness mismatch");
        c.expect(e0.has_value() == e1.has_value(), "ep definedness mismatch");
        if (c0 && c1) c.expect(oracle::rel_err(*c0, *c1) < 1e-6, "cnr vs oracle");
        if (m0 && m1) c.expect(oracle::rel_err(*m0, *m1) < 1e-6, "msr vs oracle");
        if (t0 && t1) c.expect(oracle::rel_err(*t0, *t1) < 1e-6, "tp vs oracle");
        if (e0 && e1) c.expect(oracle::rel_err(*e0, *e1) < 1e-6, "ep vs oracle");
    }
    const double dt = seconds_since(start);
    c.expect(dt < 5.0, "runtime " + std::to_string(dt) + "s exceeds 5s");
    return c.failures == 0;
}

// ---- criterion 2: affine invariance, 100 cases, 1e-9 ----
bool criterion_affine_invariance(Checker& c) {
    std::mt19937_64 rng(20240502);
    std::uniform_real_distribution<double> scale(0.3, 2.5), offset(-0.1, 0.1);
    for (int it = 0; it < 100; ++it) {
        const Image den = oracle::random_image(16, 16, rng, 0.2, 0.8);
        const Image noisy = oracle::random_image(16, 16, rng, 0.2, 0.8);
        const RoiSet roi = oracle::random_roi(16, 16, rng);
        const double a = scale(rng), b = offset(rng), s2 = scale(rng), d = offset(rng);

        const auto c0 = cnr(den, roi), c1 = cnr(Image(a * den + b), roi);
        c.expect(c0.has_value() == c1.has_value(), "cnr definedness under affine");
        if (c0 && c1) c.expect(std::abs(*c0 - *c1) < 1e-9, "cnr affine invariance");

        const auto m0 = msr(den, roi), m1 = msr(Image(a * den), roi);
        c.expect(m0.has_value() == m1.has_value(), "msr definedness under scaling");
        if (m0 && m1) c.expect(std::abs(*m0 - *m1) < 1e-9, "msr scale invariance");

        const auto t0 = tp(den, noisy, roi), t1 = tp(Image(a * den), Image(a * noisy), roi);
        c.expect(t0.has_value() == t1.has_value(), "tp definedness under joint scaling");
        if (t0 && t1) c.expect(std::abs(*t0 - *t1) < 1e-9, "tp joint-scale invariance");

        const auto e0 = ep(den, noisy, roi);
        const auto e1 = ep(Image(a * den + b), Image(s2 * noisy + d), roi);
        c.expect(e0.has_value() == e1.has_value(), "ep definedness under affine");
        if (e0 && e1) c.expect(std::abs(*e0 - *e1) < 1e-9, "ep affine invariance");
    }
    return c.failures == 0;
}

// ---- criterion 3: self-fusion noise reduction, <10 s ----
bool criterion_fusion_noise_reduction(Checker& c) {
    const auto start = Clock::now();
    SimConfig sim;
    sim.looks = 4;
    sim.seed = 42;
    sim.slices = 7;
    auto [clean, vol] = make_noisy_volume(sim, 128, 128);

    FusionConfig cfg;  // radius 3, patch 7; bandwidth raised above the L=4 SSD level
    cfg.h = 0.5;
    const Image fused = fuse_slice(vol, 3, cfg);

    double noisy_mse = 0.0;
    for (const Image& s : vol.slices) noisy_mse += mse(s, clean);
    noisy_mse /= vol.slice_count();
    const double fused_mse = mse(fused, clean);

    c.expect(fused_mse <= 0.35 * noisy_mse,
             "fused MSE " + std::to_string(fused_mse) + " vs bound " +
                 std::to_string(0.35 * noisy_mse));
    const double dt = seconds_since(start);
    c.expect(dt < 10.0, "runtime " + std::to_string(dt) + "s exceeds 10s");
    return c.failures == 0;
}

// ---- criterion 4: patch-ensemble structural guarantees ----
bool criterion_ensemble_structure(Checker& c, const std::string& cli, const fs::path& scratch) {
    SimConfig sim;
    sim.looks = 4;
    sim.seed = 2024;
    sim.slices = 1;
    auto [clean, vol] = make_noisy_volume(sim, 128, 128);
    const Image& noisy = vol.slices[0];

    SimConfig heavy_cfg;
    heavy_cfg.looks = 1;
    heavy_cfg.seed = 777;
    const Image heavy = add_speckle(clean, heavy_cfg, 0);

    EnsembleConfig cfg;  // k=16, stride=4, weights 3/2/5/0

    // (a) every winner attains the max score (exhaustive)
    auto [out, decisions] = patch_ensemble({clean, heavy}, noisy, cfg);
    bool winners_ok = true;
    for (const PatchDecision& d : decisions)
        for (double s : d.scores)
            if (s > d.scores[static_cast<std::size_t>(d.winner)]) winners_ok = false;
    c.expect(winners_ok, "winner does not attain max score");

    // (b) identical candidates reproduce the image bit-for-bit
    auto [same, dec_same] = patch_ensemble({heavy, heavy}, noisy, cfg);
    (void)dec_same;
    c.expect((same == heavy).all(), "identical candidates not bit-equal");

    // (c) the decisions file from the CLI shows the clean candidate winning
    // >= 95% of patches against heavy noise
    const fs::path dir = scratch / "ensemble_case";
    fs::create_directories(dir);
    save_image(noisy, dir / "noisy.png");
    save_image(clean, dir / "clean.png");
    save_image(heavy, dir / "heavy.png");
    const fs::path dec_csv = dir / "decisions.csv";
    const std::string cmd = cli + " ensemble --noisy " + (dir / "noisy.png").string() +
                            " --cand " + (dir / "clean.png").string() + " " +
                            (dir / "heavy.png").string() + " --out " +
                            (dir / "fused.png").string() + " --k 16 --stride 4" +
                            " --w-cnr 3 --w-msr 2 --w-tp 5 --w-ep 0 --decisions " +
                            dec_csv.string() + " > /dev/null";
    c.expect(std::system(cmd.c_str()) == 0, "ensemble CLI failed");
    std::ifstream in(dec_csv);
    std::string line;
    std::getline(in, line);  // header
    long rows = 0, clean_wins = 0;
    while (std::getline(in, line)) {
        ++rows;
        // winner is the 4th comma-separated field
        std::stringstream ss(line);
        std::string cell;
        for (int i = 0; i < 4; ++i) std::getline(ss, cell, ',');
        if (cell == "0") ++clean_wins;
    }
    c.expect(rows == static_cast<long>(decisions.size()),
             "decisions file row count " + std::to_string(rows));
    const double frac = rows > 0 ? static_cast<double>(clean_wins) / rows : 0.0;
    c.expect(frac >= 0.95, "clean candidate wins only " + std::to_string(frac));
    return c.failures == 0;
}

// ---- criterion 5: n2n identity property over 50 seeded images ----
bool criterion_n2n_identity(Checker& c) {
    std::mt19937_64 rng(20240505);
    auto identity = [](const Image& img) { return img; };
    for (int it = 0; it < 50; ++it) {
        const Image y = oracle::random_image(32, 32, rng);
        const SubsamplePlan plan = make_plan(32, 32, mix_seed(555, it));
        N2nConfig cfg;
        const N2nLoss loss = n2n_loss(identity, y, cfg, plan);
        c.expect(loss.reg == 0.0, "identity reg not exactly zero");
        const auto [g1, g2] = subsample(y, plan);
        const double expect = (g1 - g2).square().mean();
        c.expect(std::abs(loss.total - expect) <= 1e-12, "identity total vs pair gap");
    }
    return c.failures == 0;
}

// ---- criterion 6: colour-scaling properties ----
bool criterion_color_scaling(Checker& c) {
    std::mt19937_64 rng(20240506);
    for (int it = 0; it < 50; ++it) {
        const Image img = oracle::random_image(24, 24, rng, 0.1, 0.9);
        const auto [once, rep] = color_scale(img);
        c.expect(rep.applied, "scaling not applied to non-constant image");
        c.expect(once.minCoeff() == 0.0, "min not exactly 0");
        c.expect(once.maxCoeff() == 1.0, "max not exactly 1");
        const auto [twice, rep2] = color_scale(once);
        (void)rep2;
        c.expect((twice == once).all(), "idempotence not exact");

        const RoiSet roi = oracle::random_roi(24, 24, rng);
        const auto before = cnr(img, roi);
        const auto after = cnr(once, roi);
        c.expect(before.has_value() == after.has_value(), "cnr definedness changed");
        if (before && after) c.expect(std::abs(*before - *after) < 1e-9, "cnr changed by scaling");
    }
    return c.failures == 0;
}

// ---- criterion 7: end-to-end CLI run with byte-identical replay, <60 s ----
bool criterion_end_to_end(Checker& c, const std::string& cli, const fs::path& scratch) {
    const auto start = Clock::now();
    const fs::path sim_dir = scratch / "sim";
    const fs::path run_a = scratch / "run_a";
    const fs::path run_b = scratch / "run_b";
    fs::remove_all(sim_dir);
    fs::remove_all(run_a);
    fs::remove_all(run_b);

    auto shell = [&](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        c.expect(rc == 0, "command failed: " + cmd);
        return rc == 0;
    };

    if (!shell(cli + " simulate --out " + sim_dir.string() +
               " --w 128 --h 128 --slices 20 --looks 4 --seed 42"))
        return false;
    c.expect(fs::exists(sim_dir / "clean.png"), "simulate wrote no clean.png");
    c.expect(fs::exists(sim_dir / "slices" / "019.png"), "simulate wrote too few slices");

    if (!shell(cli + " pipeline --in " + (sim_dir / "slices").string() + " --out " +
               run_a.string() + " --denoiser median:window=3 --denoiser gaussian:sigma=1.0" +
               " --h 0.5 --seed 42"))
        return false;

    c.expect(fs::exists(run_a / "manifest.txt"), "missing manifest");
    c.expect(fs::exists(run_a / "decisions.csv"), "missing decisions audit");
    for (int i = 0; i < 20; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03d.png", i);
        c.expect(fs::exists(run_a / "denoised" / name), std::string("missing output ") + name);
    }
    // metrics CSV: header + slices + mean row
    std::ifstream csv(run_a / "metrics.csv");
    long lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    c.expect(lines == 1 + 20 + 1, "metrics.csv has " + std::to_string(lines) + " lines");

    // decisions audit: one row per patch per slice
    std::ifstream dec(run_a / "decisions.csv");
    long dec_lines = 0;
    while (std::getline(dec, dec_lines == 0 ? line : line)) ++dec_lines;
    const long patches = static_cast<long>(patch_grid(128, 128, 16, 4).size());
    c.expect(dec_lines == 1 + 20 * patches,
             "decisions.csv has " + std::to_string(dec_lines) + " lines, want " +
                 std::to_string(1 + 20 * patches));

    if (!shell(cli + " pipeline --manifest " + (run_a / "manifest.txt").string() + " --out " +
               run_b.string()))
        return false;

    bool identical = true;
    for (int i = 0; i < 20; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%03d.png", i);
        if (hash_file(run_a / "denoised" / name) != hash_file(run_b / "denoised" / name))
            identical = false;
    }
    identical = identical && hash_file(run_a / "decisions.csv") == hash_file(run_b / "decisions.csv");
    identical = identical && hash_file(run_a / "metrics.csv") == hash_file(run_b / "metrics.csv");
    c.expect(identical, "re-run from manifest is not byte-identical");

    const double dt = seconds_since(start);
    c.expect(dt < 60.0, "end-to-end took " + std::to_string(dt) + "s, budget 60s");
    return c.failures == 0;
}

// ---- criterion 8: README states what is NOT reproduced ----
bool criterion_readme_statement(Checker& c, const fs::path& readme) {
    std::ifstream in(readme);
    c.expect(static_cast<bool>(in), "README not found at " + readme.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    std::string lower(text.size(), '\0');
    std::transform(text.begin(), text.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    c.expect(lower.find("not reproduce") != std::string::npos,
             "README lacks the non-reproducibility statement");
    c.expect(lower.find("neural") != std::string::npos,
             "README does not explain the neural-model substitution");
    return c.failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 4) {
        std::cerr << "usage: octdn_acceptance <cli> <scratch-dir> <readme>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path scratch = argv[2];
    const fs::path readme = argv[3];
    fs::create_directories(scratch);

    struct Criterion {
        std::string name;
        std::function<bool(Checker&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. metric oracle equivalence (100 cases, 1e-6, <5s)", criterion_metric_oracles},
        {"2. affine-invariance suite (100 cases, 1e-9)", criterion_affine_invariance},
        {"3. self-fusion noise reduction (<=0.35x, <10s)", criterion_fusion_noise_reduction},
        {"4. patch-ensemble structural guarantees",
         [&](Checker& c) { return criterion_ensemble_structure(c, cli, scratch); }},
        {"5. n2n identity property (50 images, exact/1e-12)", criterion_n2n_identity},
        {"6. color-scaling properties (exact span, idempotence, CNR 1e-9)",
         criterion_color_scaling},
        {"7. end-to-end CLI with byte-identical replay (<60s)",
         [&](Checker& c) { return criterion_end_to_end(c, cli, scratch); }},
        {"8. README non-reproducibility statement",
         [&](Checker& c) { return criterion_readme_statement(c, readme); }},
    };

    int failed = 0;
    for (const Criterion& crit : criteria) {
        Checker checker;
        bool ok = false;
        try {
            ok = crit.run(checker);
        } catch (const std::exception& e) {
            checker.detail << "    exception: " << e.what() << "\n";
        }
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << crit.name << "\n" << checker.detail.str();
        if (!ok) ++failed;
    }
    if (failed > 0) {
        std::cout << failed << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
