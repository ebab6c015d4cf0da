#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace debinn {

struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x;  // row-major rows x cols
    std::vector<int> y;     // labels in [0, classes)
    int classes = 0;
    std::vector<std::string> feature_names;
    std::string split;  // "train" or "test"

    std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
    void validate() const;
};

struct TwoMoons {
    Dataset train;
    Dataset test;
};

/// Interleaving half-circles: class 0 on the upper unit arc around the
/// origin, class 1 on the mirrored arc through (1, -0.5), both with isotropic
/// Gaussian coordinate noise. Default sizes reproduce the 800/200 split with
/// per-class counts (406, 394) and (106, 94).
TwoMoons gen_two_moons(std::size_t n_train = 800, std::size_t n_test = 200,
                       double noise_std = 0.1, std::uint64_t seed = 1);

/// Noise-free generative assignment: nearest arc wins. Used as decision-grid
/// ground truth.
int two_moons_true_class(double px, double py);

/// Comma-delimited with header row; label column selected by name. When
/// class_names is empty, labels are discovered and ordered lexicographically.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& class_names = {});
Dataset parse_csv(const std::string& text, const std::string& label_column,
                  const std::vector<std::string>& class_names, const std::string& what);

void save_csv(const Dataset& d, const std::string& path, const std::string& label_column,
              const std::vector<std::string>& class_names = {});
std::string dataset_to_csv(const Dataset& d, const std::string& label_column,
                           const std::vector<std::string>& class_names = {});

struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> stddev;  // constant features replaced by 1
    std::vector<std::string> warnings;
};

/// Z-scores both splits with statistics fit on the training split only.
StandardizationParams standardize(Dataset& train, Dataset* test);

std::vector<long long> class_counts(const Dataset& d);

}  // namespace debinn
