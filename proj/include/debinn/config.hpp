#pragma once

#include <string>
#include <utility>
#include <vector>

#include "debinn/ga.hpp"
#include "debinn/gd.hpp"
#include "debinn/geometry.hpp"

namespace debinn {

/// Ordered key/value list; order carries through to snapshots and determines
/// sweep grid order.
struct KeyValues {
    std::vector<std::pair<std::string, std::string>> items;

    const std::string* find(const std::string& key) const;
    void set(const std::string& key, const std::string& value);  // replaces or appends
    bool has(const std::string& key) const { return find(key) != nullptr; }
};

/// `key = value` lines, '#' comments, blank lines ignored.
KeyValues parse_config_text(const std::string& text);
KeyValues load_config(const std::string& path);
std::string config_to_text(const KeyValues& kv);

enum class Optimizer { GA, GD };
const char* to_string(Optimizer o);

/// One experiment description: dataset source, architecture, optimizer
/// settings, seeds. Sweep axes live beside it as `sweep.<key> = a | b | c`.
struct ExperimentConfig {
    std::string name;  // report grouping key; defaults to the dataset selector
    std::string dataset = "two-moons";  // "two-moons" | "csv"
    std::string train_csv, test_csv;
    std::string label_column = "label";
    std::vector<std::string> class_names;
    std::size_t moons_train = 800, moons_test = 200;
    double moons_noise = 0.1;
    std::uint64_t moons_seed = 1;
    bool standardize_features = true;

    Optimizer optimizer = Optimizer::GA;
    NetworkSpec spec;  // input_dim/output_dim filled from the dataset at run time
    bool uniform_weights = false;  // uniform vs inverse-frequency class weights
    GAConfig ga;
    GDConfig gd;
    std::vector<std::uint64_t> seeds{1};
    std::size_t threads = 0;

    static ExperimentConfig from_kv(const KeyValues& kv);
    KeyValues to_kv() const;
};

/// Sweep axes in file order; the first axis is the outermost grid dimension.
struct SweepAxes {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;

    std::size_t grid_size() const;
};

SweepAxes sweep_axes_from(const KeyValues& kv);

/// Base config with sweep keys stripped and each grid point's overrides
/// applied; index i enumerates the Cartesian product row-major.
std::vector<KeyValues> expand_grid(const KeyValues& base, const SweepAxes& axes);

}  // namespace debinn
