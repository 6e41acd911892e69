#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "keymesh/analysis.hpp"
#include "keymesh/config.hpp"

namespace keymesh {

enum class Scenario {
    plan,
    simulate,
    table1,
    capture_sweep,
    eg_compare,
    rescue_eval,
    broadcast_count,
};

Scenario scenario_from_name(std::string_view name);
std::string_view scenario_name(Scenario s);

struct ExperimentSpec {
    SimConfig config;
    Scenario scenario = Scenario::simulate;
    std::uint32_t trials = 1;
    std::filesystem::path output_path; // empty: no CSV file written

    // capture_sweep / eg_compare
    std::vector<std::uint32_t> x_values;
    std::vector<double> target_p; // matched-p mode; eg_compare default {0.33, 0.5}

    // optional artifact dumps, written for the first trial of `simulate`
    std::filesystem::path dump_deployment;
    std::filesystem::path dump_rings;
    std::filesystem::path dump_transcripts;

    void validate() const;
};

struct RunRecord {
    std::string scenario;
    std::string config_hash;
    std::uint64_t rng_seed = 0;
    std::vector<std::pair<std::string, double>> metrics;
    double duration_ms = 0.0;
};

// Hex id of the canonicalized config.
std::string config_hash(const SimConfig& cfg);

// Executes the scenario over `trials` seeded runs (rng_seed, rng_seed+1, ...)
// and writes the scenario's CSV to output_path. Returns one record per
// trial (per combination for table1).
std::vector<RunRecord> run(const ExperimentSpec& spec);

// --- scenario internals, exposed for tests and the acceptance suite ---

struct TrialMetrics {
    double local = 0.0;
    double global = 0.0;
    std::uint32_t uncovered = 0;
    double expected_uncovered = 0.0;
    std::uint64_t transmissions = 0;
    std::uint32_t group_components = 0;
    bool group_connected = false;
};

// One full protocol run + key-graph metrics.
TrialMetrics run_trial(const SimConfig& cfg, std::uint64_t seed);

struct Table1Row {
    std::uint32_t keys_total = 0;
    std::uint32_t t_key = 0;
    double local = 0.0;
    double local_stderr = 0.0;
    double global = 0.0;
    double global_stderr = 0.0;
    std::uint32_t trials = 0;
};

// Local vs global connectivity for keys_total in {40,60,100} x T_key in {2,4}.
std::vector<Table1Row> table1_rows(const SimConfig& base, std::uint32_t trials);

struct CaptureRow {
    std::uint32_t x = 0;
    double empirical = 0.0;      // mean over trials
    double empirical_stderr = 0.0;
    double analytic_bound = 0.0;
    double eligible_links = 0.0; // mean over trials
};

std::vector<CaptureRow> capture_sweep_rows(const SimConfig& cfg, std::uint32_t trials,
                                           const std::vector<std::uint32_t>& x_values);

struct EgCompareRow {
    double target_p = 0.0;
    double matched_p = 0.0;       // simulated local connectivity at the chosen k
    std::uint32_t matched_k = 0;
    std::uint64_t ring_size = 0;  // L = t_key * k
    std::uint64_t scheme_pool = 0;
    std::uint64_t eg_pool = 0;
    std::uint32_t x = 0;
    double scheme_bound = 0.0;
    double eg_bound = 0.0;
};

std::vector<EgCompareRow> eg_compare_rows(const SimConfig& base,
                                          const std::vector<double>& targets,
                                          const std::vector<std::uint32_t>& x_values,
                                          std::uint32_t sweep_trials);

// Smallest k whose simulated local connectivity reaches target_p (the
// neighboring k is returned instead when it lands closer).
struct MatchedRing {
    std::uint32_t k = 0;
    double measured_p = 0.0;
};
MatchedRing match_ring_size(const SimConfig& base, double target_p,
                            std::uint32_t trials);

// CSV writers (schema-stable, byte-deterministic)
void write_metrics_csv(std::ostream& out, const SimConfig& cfg,
                       const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& per_trial_values);
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);
void write_capture_csv(std::ostream& out, const std::vector<CaptureRow>& rows);
void write_eg_compare_csv(std::ostream& out, const std::vector<EgCompareRow>& rows);

} // namespace keymesh
