#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "debinn/data.hpp"
#include "debinn/forward.hpp"
#include "debinn/geometry.hpp"
#include "debinn/loss.hpp"

namespace debinn {

enum class DerivativeMode { Exact, LinearSurrogate };

struct GDConfig {
    double lr = 0.1;
    std::size_t epochs = 100;
    DerivativeMode derivative_mode = DerivativeMode::LinearSurrogate;
    std::size_t batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 1;
    bool full_groupnorm_jacobian = false;  // comparison mode; diagonal is the default
    double divergence_threshold = 1e6;

    void validate() const;
};

const char* to_string(DerivativeMode m);

/// dC/dy_out of softmax + weighted cross-entropy for one sample:
/// beta_y * (p - onehot) * inv_n.
std::vector<double> output_error(std::span<const double> probs, int label,
                                 const ClassWeights& beta, double inv_n);

/// Diagonal GroupNorm derivative d a_hat(i) / d a(i) per neuron: the change
/// of a neuron's own normalized activation when only its activation moves
/// (group statistics recomputed). Off-diagonal terms are dropped by the
/// backward pass that consumes this.
std::vector<double> groupnorm_backward_diag(std::span<const double> a,
                                            std::span<const double> mu,
                                            std::span<const double> var, double eps,
                                            std::size_t m);

struct LayerGrads {
    Matrix dw;  // wrt the weights used in the forward pass
    std::vector<double> dgamma;
    std::vector<double> dbeta;
};

struct BatchGradients {
    double data_loss = 0.0;
    std::vector<LayerGrads> layers;        // index l-1 holds network layer l
    std::vector<double> output_error_sum;  // e summed over the batch
    std::vector<int> predictions;          // per processed sample
};

/// Forward + backward over the full dataset, or the rows listed in `subset`.
/// Gradients carry the 1/N of the averaged loss.
BatchGradients backward_batch(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
                              const Dataset& d, std::span<const std::size_t> subset,
                              const ClassWeights& beta, bool full_groupnorm_jacobian = false);

/// Maps dC/dW through row standardization back to the raw mapped weights.
Matrix weight_standardize_backward(const Matrix& dw, const LayerLinear& lin);

/// Adds d(l1 |w| + l2 w^2)/dw on the raw mapped weights.
void add_penalty_gradient(Matrix& dw_raw, const Matrix& w_raw, double l1, double l2);

/// dC/dd per connection. Inverse and the linear surrogate use -1/dmax with
/// dmax frozen at the current geometry; exact Gaussian differentiates the
/// kernel.
Matrix distance_gradients(const Matrix& dw_raw, const Matrix& dist, double dmax,
                          const Mapping& mapping, DerivativeMode mode);

/// Per-endpoint displacement accumulator. Sums hold per-connection vectors
/// -lr * dC/dd * dd/dp; the applied step is the per-endpoint mean. Counts
/// always equal the endpoint's incident connections; connections shorter than
/// kDistEpsilon contribute a zero vector and bump `degenerate_connections`.
struct DisplacementSet {
    std::vector<std::vector<Point3>> soma_sum;  // [layer][neuron]
    std::vector<std::vector<Point3>> axon_sum;
    std::vector<std::vector<int>> soma_count;
    std::vector<std::vector<int>> axon_count;
    std::size_t degenerate_connections = 0;

    Point3 soma_mean(std::size_t layer, std::size_t i) const;
    Point3 axon_mean(std::size_t layer, std::size_t i) const;
};

DisplacementSet displacement_vectors(const NetworkGeometry& g,
                                     const std::vector<Matrix>& dist_grads, double lr);

/// Even t moves somas only, odd t moves axons only.
void apply_phase(NetworkGeometry& g, const DisplacementSet& displ, std::size_t t);

/// Plain gradient step on gamma/beta; applied every iteration.
void apply_norm_step(NetworkGeometry& g, const std::vector<LayerGrads>& grads, double lr);

enum class GDStatus { Ok, Diverged };

struct GDRow {
    std::size_t epoch = 0;
    int phase = 0;  // 0 = soma update, 1 = axon update
    double train_loss = 0.0;
    double train_bacc = 0.0;
    double test_bacc = 0.0;
};

struct GDResult {
    NetworkGeometry geometry;
    std::vector<GDRow> history;
    GDStatus status = GDStatus::Ok;
    double final_loss = 0.0;
};

using IterationHook = std::function<void(std::size_t t, const NetworkGeometry&)>;

/// Spatial gradient descent: forward/backward, weight-to-distance gradients,
/// averaged displacement vectors, alternating soma/axon updates. Rejects
/// Singularity initialization (zero gradients everywhere).
GDResult train_gd(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                  const GDConfig& config, const ClassWeights& beta,
                  const IterationHook& hook = {});

struct GradCheckResult {
    double max_rel_err = 0.0;  // |analytic - numeric| / max(|analytic|, |numeric|, 1e-4)
    double max_abs_err = 0.0;
    std::size_t coordinates = 0;
};

/// Central-difference check of every spatial coordinate and every gamma/beta
/// against the analytic gradients (per-connection contributions summed, not
/// averaged). The differenced loss freezes dmax at the base geometry, applies
/// the linear surrogate around the base weights when that mode is selected,
/// and, with groupnorm enabled, renormalizes each activation against its
/// base-trace group so that its exact gradient is the diagonal-convention
/// one the backward pass computes.
GradCheckResult finite_difference_oracle(const NetworkGeometry& g, const Dataset& batch,
                                         const ClassWeights& beta, DerivativeMode mode,
                                         double eps_fd = 1e-5);

}  // namespace debinn
