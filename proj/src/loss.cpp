#include "debinn/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace debinn {

void ClassWeights::validate() const {
    if (w.empty()) throw std::invalid_argument("class weights: empty");
    for (double v : w)
        if (!(v > 0.0)) throw std::invalid_argument("class weights: all weights must be positive");
}

ClassWeights uniform_class_weights(std::size_t classes) {
    return ClassWeights{std::vector<double>(classes, 1.0)};
}

ClassWeights class_weights_from_counts(std::span<const long long> counts) {
    long long total = 0;
    for (auto c : counts) {
        if (c <= 0) throw std::invalid_argument("class_weights_from_counts: zero class count");
        total += c;
    }
    ClassWeights out;
    out.w.resize(counts.size());
    const double m = static_cast<double>(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        out.w[c] = static_cast<double>(total) / (m * static_cast<double>(counts[c]));
    return out;
}

double sample_weighted_ce(std::span<const double> probs, int label, const ClassWeights& beta) {
    const double p = std::max(probs[static_cast<std::size_t>(label)], kProbEpsilon);
    return -beta[static_cast<std::size_t>(label)] * std::log(p);
}

double weighted_cross_entropy(std::span<const double> probs, std::size_t classes,
                              std::span<const int> labels, const ClassWeights& beta) {
    if (labels.empty()) throw std::invalid_argument("weighted_cross_entropy: empty batch");
    if (probs.size() != labels.size() * classes)
        throw std::invalid_argument("weighted_cross_entropy: probs/labels shape mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int y = labels[k];
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw std::invalid_argument("weighted_cross_entropy: label out of range");
        sum += sample_weighted_ce(probs.subspan(k * classes, classes), y, beta);
    }
    return sum / static_cast<double>(labels.size());
}

double l1_l2_penalty(const std::vector<LayerLinear>& linears, double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0) throw std::invalid_argument("l1_l2_penalty: negative coefficient");
    if (l1 == 0.0 && l2 == 0.0) return 0.0;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (const auto& lin : linears)
        for (double w : lin.w_raw.data) {
            abs_sum += std::abs(w);
            sq_sum += w * w;
        }
    return l1 * abs_sum + l2 * sq_sum;
}

double l1_l2_penalty(const NetworkGeometry& g, double l1, double l2) {
    return l1_l2_penalty(network_linears(g), l1, l2);
}

BatchEval evaluate_batch(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
                         const Dataset& d, const ClassWeights& beta) {
    if (d.cols != g.spec.input_dim)
        throw std::invalid_argument("evaluate_batch: dataset width does not match input_dim");
    BatchEval out;
    out.predictions.resize(d.rows);
    const std::size_t L = g.spec.layer_count();
    std::vector<double> cur, nxt;
    double loss_sum = 0.0;
    for (std::size_t k = 0; k < d.rows; ++k) {
        const auto x = d.row(k);
        cur.assign(x.begin(), x.end());
        for (std::size_t l = 1; l < L; ++l) {
            const Matrix& w = linears[l - 1].w;
            nxt.resize(w.rows);
            for (std::size_t j = 0; j < w.rows; ++j) {
                double acc = 0.0;
                const auto row = w.row(j);
                for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * cur[i];
                nxt[j] = activate(g.spec.activation, acc);
            }
            if (g.spec.groupnorm) {
                const std::size_t m = g.spec.group_size_for(w.rows);
                for (std::size_t base = 0; base < w.rows; base += m) {
                    double mu = 0.0;
                    for (std::size_t i = 0; i < m; ++i) mu += nxt[base + i];
                    mu /= static_cast<double>(m);
                    double var = 0.0;
                    for (std::size_t i = 0; i < m; ++i) {
                        const double diff = nxt[base + i] - mu;
                        var += diff * diff;
                    }
                    var /= static_cast<double>(m);
                    const double inv = 1.0 / std::sqrt(var + kNormEpsilon);
                    for (std::size_t i = 0; i < m; ++i) nxt[base + i] = (nxt[base + i] - mu) * inv;
                }
            }
            for (std::size_t j = 0; j < w.rows; ++j) nxt[j] = g.gamma[l][j] * nxt[j] + g.beta[l][j];
            cur.swap(nxt);
        }
        const auto probs = softmax(cur);
        out.predictions[k] = static_cast<int>(argmax_index(probs));
        loss_sum += sample_weighted_ce(probs, d.y[k], beta);
    }
    out.data_loss = loss_sum / static_cast<double>(d.rows);
    return out;
}

}  // namespace debinn
