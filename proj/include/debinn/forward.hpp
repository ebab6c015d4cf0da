#pragma once

#include <span>
#include <vector>

#include "debinn/geometry.hpp"
#include "debinn/util.hpp"

namespace debinn {

double activate(ActivationKind k, double z);
double activate_deriv(ActivationKind k, double z);  // ReLU subgradient 0 at z = 0

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

struct GroupNormResult {
    std::vector<double> normalized;  // a_hat
    std::vector<double> mean;        // per group
    std::vector<double> var;         // per group, population (1/m) variance
};

/// Normalizes consecutive groups of size m to zero mean / unit variance.
/// Width must be divisible by m.
GroupNormResult groupnorm_forward(std::span<const double> a, std::size_t m, double eps);

/// Rescales each row to zero mean and unit variance (eps-guarded).
Matrix weight_standardize(const Matrix& w, double eps = kNormEpsilon);

/// Weights of one layer pair as used by the forward pass, plus everything the
/// backward pass needs to chain through them.
struct LayerLinear {
    Matrix w;           // weights applied to the previous layer's outputs
    Matrix w_raw;       // mapped weights before standardization (== w when WS off)
    Matrix dist;        // distances behind the raw weights
    std::vector<double> row_mean;     // WS internals, empty when WS off
    std::vector<double> row_inv_std;  // 1/sqrt(var + eps) per row
    double dmax = 0.0;
    bool degenerate = false;
};

std::vector<LayerLinear> network_linears(const NetworkGeometry& g);

struct LayerTrace {
    std::vector<double> z;      // pre-activations
    std::vector<double> a;      // sigma(z)
    std::vector<double> a_hat;  // normalized activations (== a when groupnorm off)
    std::vector<double> y;      // gamma * a_hat + beta
    std::vector<double> mu;     // per-group stats, empty when groupnorm off
    std::vector<double> var;
};

struct ForwardTrace {
    std::vector<double> input;
    std::vector<LayerTrace> layers;  // index l-1 holds network layer l
    std::vector<double> probs;       // softmax of last layer's y

    const std::vector<double>& output(std::size_t layer) const {
        return layer == 0 ? input : layers[layer - 1].y;
    }
};

/// Full inference pipeline: z = W y_prev, a = sigma(z), groupnorm, affine;
/// softmax on the last layer's outputs.
ForwardTrace forward(const NetworkGeometry& g, std::span<const double> x);
ForwardTrace forward_with(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
                          std::span<const double> x);

/// Argmax class, ties broken toward the lowest index.
std::size_t argmax_index(std::span<const double> v);
std::size_t predict(const NetworkGeometry& g, std::span<const double> x);

}  // namespace debinn
