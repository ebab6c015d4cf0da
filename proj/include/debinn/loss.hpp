#pragma once

#include <span>
#include <vector>

#include "debinn/data.hpp"
#include "debinn/forward.hpp"
#include "debinn/geometry.hpp"

namespace debinn {

// Probability floor keeping log() finite.
constexpr double kProbEpsilon = 1e-12;

/// Per-class loss weights beta_c, all positive.
struct ClassWeights {
    std::vector<double> w;

    double operator[](std::size_t c) const { return w[c]; }
    std::size_t size() const { return w.size(); }
    void validate() const;
};

ClassWeights uniform_class_weights(std::size_t classes);

/// Inverse-frequency weights: beta_c = N_total / (M * N_c), mean ~ 1.
ClassWeights class_weights_from_counts(std::span<const long long> counts);

double sample_weighted_ce(std::span<const double> probs, int label, const ClassWeights& beta);

/// Average weighted cross-entropy over a batch; probs is row-major N x M.
double weighted_cross_entropy(std::span<const double> probs, std::size_t classes,
                              std::span<const int> labels, const ClassWeights& beta);

/// L1/L2 penalty over the derived (mapped, pre-standardization) connection
/// weights, shared by GA fitness and the GD objective.
double l1_l2_penalty(const std::vector<LayerLinear>& linears, double l1, double l2);
double l1_l2_penalty(const NetworkGeometry& g, double l1, double l2);

struct BatchEval {
    double data_loss = 0.0;  // weighted cross-entropy, penalty not included
    std::vector<int> predictions;
};

/// Forward pass over a whole dataset without per-sample trace allocation.
BatchEval evaluate_batch(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
                         const Dataset& d, const ClassWeights& beta);

}  // namespace debinn
