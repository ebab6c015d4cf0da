#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace debinn {

struct ConfusionMatrix {
    int classes = 0;
    std::vector<long long> counts;  // row = true class, column = predicted

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int m) : classes(m), counts(static_cast<std::size_t>(m) * m, 0) {}

    long long& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * classes + pred]; }
    long long at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * classes + pred]; }
    long long row_sum(int truth) const;
    long long total() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int classes);

/// Mean of per-class recalls.
double balanced_accuracy(const ConfusionMatrix& cm);

struct SeSp {
    double se = 0.0;
    double sp = 0.0;
};

/// Binary: Se/Sp of the given positive class. Multiclass: macro means over
/// one-vs-rest reductions (positive_class ignored).
SeSp sensitivity_specificity(const ConfusionMatrix& cm, int positive_class = 0);

struct SweepStats {
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // sample (N-1); 0 for a single value
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

SweepStats sweep_stats(std::span<const double> values);

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;  // two-sided
    bool exact = false;
};

/// Rank-sum U with midrank ties. Exact two-sided p by enumerating the null
/// distribution when combined n <= 16 and there are no ties, otherwise normal
/// approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys);

struct Bounds2D {
    double xmin = 0.0, xmax = 1.0;
    double ymin = 0.0, ymax = 1.0;
};

struct LabelGrid {
    std::size_t resolution = 0;
    Bounds2D bounds;
    std::vector<int> labels;  // row-major, y outer, x inner

    double x_at(std::size_t i) const;
    double y_at(std::size_t j) const;
};

using Classifier2D = std::function<int(double, double)>;

/// Uniform resolution x resolution lattice (inclusive of the bounds) with the
/// classifier's label at each node.
LabelGrid decision_grid(const Classifier2D& clf, const Bounds2D& bounds, std::size_t resolution);

/// Fraction of cells whose labels disagree.
double misclassified_area_fraction(const LabelGrid& grid, const LabelGrid& truth);

std::string grid_to_csv(const LabelGrid& grid);
std::string confusion_to_csv(const ConfusionMatrix& cm,
                             const std::vector<std::string>& class_names = {});

}  // namespace debinn
