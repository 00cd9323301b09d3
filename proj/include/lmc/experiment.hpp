#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lmc/diagnostics.hpp"
#include "lmc/samplers.hpp"
#include "lmc/targets.hpp"

namespace lmc {

class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct TargetConfig
{
    std::string name;
    // particle_box
    BoxSpec box;
    double gmax = kDefaultGradClamp;
    PhysConstants consts;
    // gauss_mix
    std::vector<GaussComponent> components;
};

struct SamplerBlock
{
    //! File prefix; defaults to the sampler name and must be unique.
    std::string label;
    SamplerConfig config;
};

struct ExperimentConfig
{
    TargetConfig target;
    std::vector<SamplerBlock> samplers;
    std::size_t n = 1000;
    std::size_t burn_in = 0;
    std::size_t chains = 1;
    std::uint64_t seed = 0;
    //! Empty means "mode_center".
    std::optional<Vector> init;
    std::filesystem::path outputs = "out";
    std::size_t grid_res = 32;
    std::size_t max_lag = 200;

    //! Throws ConfigError when an invariant does not hold.
    void validate() const;
};

//! Parse a JSON config document. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

//! Normalized JSON form of a config (all defaults made explicit).
std::string config_to_json(const ExperimentConfig& cfg);

std::unique_ptr<Target> make_target(const TargetConfig& cfg);

//! Configured init, or the first mode center (box) / first component mean.
Vector resolve_init(const ExperimentConfig& cfg);

struct ChainRun
{
    std::string label;
    std::uint64_t chain_id = 0;
    Chain chain;
    DiagnosticsReport report;
};

struct ExperimentResult
{
    //! Sorted by (sampler block order, chain id).
    std::vector<ChainRun> runs;
    //! Written files relative to the output directory, sorted.
    std::vector<std::string> files;
};

/*!
 * Run every (sampler, chain) pair on up to `workers` threads, then write
 * chain CSVs, diagnostics, histograms, the analytic grid (box targets) and
 * manifest.json. Output content does not depend on `workers`.
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

//! run_experiment plus comparison.csv. Needs at least two sampler blocks.
ExperimentResult compare_samplers(const ExperimentConfig& cfg, int workers = 1);

//! Write target_grid.csv. Throws ConfigError for non-box targets.
std::filesystem::path emit_grid(const ExperimentConfig& cfg);

//! Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace lmc
