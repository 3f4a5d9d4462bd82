#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsu/metrics.hpp"
#include "lsu/synthesis.hpp"
#include "lsu/transfer.hpp"

namespace lsu {

/// All knobs of one experiment. Presets mirror the five published settings;
/// any field can be overridden through the key = value config file.
struct ExperimentConfig {
    std::string experiment_id = "custom";  // "1".."5" or "custom"
    std::string system = "system2";        // system2 | system3 | inline
    int n_sources = 1;
    std::vector<double> ratios = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    double r = 1e-3;    // target observation-noise half-width (isotopic)
    double rho = 1e-5;  // state-noise half-width (isotopic)
    int horizon = 50;
    int t_lo = 1;
    int mc_runs = 50;
    MismatchSpec mismatch;
    char synthesis_graph = 'V';  // 'V' or 'U'
    double alpha = 0.0;
    double prior_halfwidth = 1.0;
    InputGenerator input_gen;
    EmptyPolicy empty_policy = EmptyPolicy::DiscardRun;
    std::uint64_t master_seed = 1;
    double synth_scale = 1.0;  // scales A in synthesis AND all analysis models
    std::optional<LsuModel> inline_model;

    /// Every violated invariant, empty when valid.
    std::vector<std::string> validate() const;

    /// Canonical key = value dump (round-trips through parse_config_text).
    std::string echo() const;
};

struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v);
};

ExperimentConfig preset(int experiment_id);

/// Desk-scale shrink: divides mc_runs, horizon and t_lo by k (horizon never
/// drops below 50 and every value stays >= 1).
void apply_scale(ExperimentConfig& cfg, int k);

/// Parses key = value text ('#' comments); unknown keys and malformed values
/// are reported through ConfigError. Fields not mentioned keep the values in
/// `base`.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});

struct ResultsTable {
    std::vector<MetricsRecord> rows;  // (ratio, seed, method) cells
    std::string config_echo;
    std::string version;
    std::map<std::string, double> wall_clock_seconds;  // per method
};

/// Full Monte Carlo protocol: for each ratio x seed, synthesize one
/// trajectory set and run isolated, FPD-BTL and BCM on the same data.
/// Deterministic for a given config regardless of worker count.
ResultsTable run_experiment(const ExperimentConfig& cfg, int workers = 1);

std::string results_csv(const ResultsTable& table);

/// Writes results.csv, meta.txt and (optionally) tnse/av/avr/pc SVG plots.
void write_outputs(const ResultsTable& table, const std::string& out_dir,
                   bool csv, bool svg);

/// Source-predictor trace of the first (ratio, seed) cell's BTL run,
/// one flat record per (source, step).
std::string source_trace_csv(const ExperimentConfig& cfg);

extern const char* const kVersion;

}  // namespace lsu
