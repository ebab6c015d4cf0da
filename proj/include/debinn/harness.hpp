#pragma once

#include <string>
#include <vector>

#include "debinn/config.hpp"
#include "debinn/data.hpp"
#include "debinn/eval.hpp"

namespace debinn {

struct Curve {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// One (config, seed) training result plus everything the report needs.
struct RunRecord {
    std::string run_id;
    std::string dir;   // persistence directory, empty when not persisted
    KeyValues config;  // resolved snapshot, replayable via `train --config`
    std::uint64_t seed = 0;
    std::size_t order = 0;  // grid-order index, stable tie-break
    std::string status = "ok";  // ok | diverged | failed
    std::string error;
    double train_bacc = 0.0, test_bacc = 0.0, test_se = 0.0, test_sp = 0.0;
    double objective = 0.0;  // final loss (gd) or best fitness (ga)
    ConfusionMatrix cm_test;
    Curve curve;
    double duration_s = 0.0;
};

struct LoadedData {
    Dataset train;
    Dataset test;
};

/// Materializes the configured dataset (generator or CSV pair); CSV features
/// are standardized with train-split statistics when enabled.
LoadedData load_experiment_data(const ExperimentConfig& c);

/// Completes the network spec against the dataset shape.
NetworkSpec resolve_spec(const ExperimentConfig& c, const LoadedData& data);

/// Trains one run and evaluates it on the held-out split. Persists the run
/// directory when out_dir is nonempty. Trainer failures land in status/error,
/// they do not propagate.
RunRecord run_single(const ExperimentConfig& c, std::uint64_t seed,
                     const std::string& out_dir = "", const std::string& run_id = "run",
                     std::size_t order = 0);

struct SweepResult {
    std::vector<RunRecord> records;
    std::size_t resumed = 0;  // runs found complete on disk and not re-run
};

/// Expands sweep axes x seeds (guarded at 10000 runs), executes missing runs
/// in a worker pool, and persists each into out_dir/<run_id>/.
SweepResult run_sweep(const KeyValues& base_config, const std::string& out_dir);

std::vector<RunRecord> load_records(const std::string& out_dir);

/// Emits best-run and sweep-statistics tables (with GA-vs-GD Mann-Whitney p
/// per dataset), combined curve CSVs, and decision grids for 2D datasets.
void write_report(const std::string& runs_dir, const std::string& report_dir);

Bounds2D data_bounds(const Dataset& d, double pad_fraction = 0.1);
LabelGrid model_decision_grid(const NetworkGeometry& g, const Bounds2D& bounds,
                              std::size_t resolution);
LabelGrid two_moons_truth_grid(const Bounds2D& bounds, std::size_t resolution);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace debinn
