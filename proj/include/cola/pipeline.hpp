#pragma once

#include "cola/activation_selection.hpp"
#include "cola/coverage.hpp"
#include "cola/data_model.hpp"
#include "cola/processing.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cola {

struct CapabilityRef {
    std::string capability;
    double weight = 1.0;
    std::filesystem::path reference;
};

struct HarnessPaths {
    std::filesystem::path layers;
    std::filesystem::path eval;
    // Candidate activations for `compare`; defaults to PipelineConfig::activations.
    std::optional<std::filesystem::path> candidates;
};

// One JSON document; every relative path is resolved against base_dir (the
// directory holding the config file).
struct PipelineConfig {
    std::filesystem::path base_dir;
    // SHA-256 of the config file when loaded from disk.
    std::string source_sha256;
    std::uint64_t seed = 0;
    std::uint32_t vocab_size = 32000;
    std::filesystem::path output_dir = "out";

    std::vector<std::filesystem::path> pool;
    std::vector<CapabilityRef> capabilities;
    std::size_t budget = 1;
    CoverageOptions coverage;
    std::size_t embedding_dim = 256;

    ProcessingConfig processing;
    std::optional<std::size_t> process_count;

    std::optional<std::filesystem::path> activations;
    std::size_t projection_dim = 64;
    KMeansConfig kmeans;

    std::optional<HarnessPaths> harness;
    std::optional<CompressionScheme> scheme;

    std::filesystem::path resolve(const std::filesystem::path & p) const;
};

PipelineConfig parse_pipeline_config(const nlohmann::json & j, const std::filesystem::path & base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path & path);

// Stage seed = derive_seed(master, stage name).
std::uint64_t stage_seed(const PipelineConfig & cfg, std::string_view stage);

inline constexpr std::string_view k_stage_select_datasets = "stage1:select_datasets";
inline constexpr std::string_view k_stage_process = "stage2:process";
inline constexpr std::string_view k_stage_select_samples = "stage3:select_samples";
inline constexpr std::string_view k_stage_evaluate = "evaluate";

// Hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path & path);

// Runs dataset selection, processing, activation ingestion and sample
// selection (plus evaluation when harness and scheme are configured), writing
// every artifact under output_dir together with manifest.json. On failure the
// files written by this run are removed and a StageError names the stage.
// Returns the manifest.
nlohmann::ordered_json run_pipeline(const PipelineConfig & cfg);

struct ComparisonTrial {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<double> random_errors;
    double random_mean = 0.0;
    bool cola_wins = false;
};

struct ComparisonReport {
    std::size_t k = 0;
    std::vector<std::string> cola_selection;
    std::vector<double> cola_errors;
    double cola_mean = 0.0;
    std::vector<ComparisonTrial> trials;
    double random_mean = 0.0; // mean over trials of the per-trial mean
    double win_rate = 0.0;    // fraction of trials with cola_mean <= random_mean
};

// Evaluates the curated selection (seeded like stage 3 of run_pipeline)
// against `trials` uniformly random selections of the same size.
ComparisonReport compare_selections(const PipelineConfig & cfg, std::size_t trials);
nlohmann::ordered_json to_json(const ComparisonReport & r);

} // namespace cola
