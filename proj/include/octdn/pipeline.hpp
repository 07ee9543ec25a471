#pragma once

// Two-phase orchestration. Phase 1 fuses neighbouring slices and refines the
// fused volume with the denoiser that minimizes the mean Neighbor2Neighbor
// loss over a configured candidate grid, yielding a pseudo-clean volume.
// Phase 2 runs every configured denoiser on the original slices, fuses the
// candidates with the patch ensemble scored against the noisy slice, applies
// colour scaling and reports per-slice metrics. Every run writes a key-value
// manifest (config, seed, chosen denoiser, output hashes) sufficient to
// reproduce it byte-for-byte.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "octdn/denoisers.hpp"
#include "octdn/ensemble.hpp"
#include "octdn/image.hpp"
#include "octdn/n2n.hpp"
#include "octdn/self_fusion.hpp"

namespace octdn {

struct PipelineConfig {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    FusionConfig fusion{};
    N2nConfig n2n{};
    std::vector<DenoiserSpec> denoisers;        // phase-2 candidates (>= 1)
    std::vector<DenoiserSpec> phase1_grid;      // empty => denoisers + identity
    EnsembleConfig ensemble{};
    bool emit_intermediates = false;
    std::uint64_t seed = 0;
    std::optional<double> split;                // train fraction, e.g. 0.9
    int fold = 1;                               // 1 or 2

    void validate() const;
    std::vector<DenoiserSpec> effective_phase1_grid() const;
};

struct Phase1Result {
    Volume fused;
    Volume pseudo;
    DenoiserSpec chosen;
    std::vector<double> grid_losses;  // mean total loss per grid entry
};

struct Phase2Result {
    Volume output;
    std::vector<std::vector<PatchDecision>> decisions;  // per slice
};

Phase1Result run_phase1_detailed(const Volume& vol, const PipelineConfig& cfg);
/// Spec-shaped wrapper: the pseudo-clean volume of phase 1.
Volume run_phase1(const Volume& vol, const PipelineConfig& cfg);

Phase2Result run_phase2_detailed(const Volume& vol, const Volume& pseudo,
                                 const PipelineConfig& cfg);
Volume run_phase2(const Volume& vol, const Volume& pseudo, const PipelineConfig& cfg);

/// Per-slice metric CSV of `result` scored against `noisy` (ROI from an Otsu
/// split of each noisy slice), plus a final mean row that averages the
/// defined values per column. Columns:
/// subject_id,slice_index,method,cnr,msr,tp,ep,composite.
void report(const Volume& noisy, const Volume& result, const std::filesystem::path& out,
            const std::string& method = "pipeline", const MetricWeights& weights = {});

/// FNV-1a 64-bit over a file's bytes, as 16 hex digits.
std::string hash_file(const std::filesystem::path& path);

/// Flat `key = value` config file (comments with '#'). Manifests reuse the
/// same syntax, so a manifest can be loaded back as a config.
std::map<std::string, std::string> read_keyvalue_file(const std::filesystem::path& path);
PipelineConfig config_from_keyvalues(const std::map<std::string, std::string>& kv);

/// True when the subject is in the evaluation partition for (split, fold):
/// u = fnv1a64(subject_id)/2^64; fold 1 keeps u >= split, fold 2 keeps
/// u < 1-split.
bool in_eval_fold(const std::string& subject_id, double split, int fold);

struct RunSummary {
    std::vector<std::string> subjects;
    std::filesystem::path manifest_path;
};

/// Full run: load volume(s) from input_dir (a directory of images, or a
/// directory of per-subject subdirectories), process, write outputs and the
/// manifest under output_dir.
RunSummary run_pipeline(const PipelineConfig& cfg);

}  // namespace octdn
