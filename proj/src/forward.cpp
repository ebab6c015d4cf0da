#include "debinn/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace debinn {

double activate(ActivationKind k, double z) {
    switch (k) {
        case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case ActivationKind::Tanh: return std::tanh(z);
        case ActivationKind::ReLU: return z > 0.0 ? z : 0.0;
    }
    return 0.0;
}

double activate_deriv(ActivationKind k, double z) {
    switch (k) {
        case ActivationKind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
        case ActivationKind::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case ActivationKind::ReLU: return z > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

GroupNormResult groupnorm_forward(std::span<const double> a, std::size_t m, double eps) {
    if (m == 0 || a.size() % m != 0)
        throw std::invalid_argument("groupnorm_forward: group size must divide width");
    GroupNormResult out;
    out.normalized.resize(a.size());
    const std::size_t groups = a.size() / m;
    out.mean.resize(groups);
    out.var.resize(groups);
    for (std::size_t gidx = 0; gidx < groups; ++gidx) {
        const std::size_t base = gidx * m;
        double mu = 0.0;
        for (std::size_t i = 0; i < m; ++i) mu += a[base + i];
        mu /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = a[base + i] - mu;
            var += d * d;
        }
        var /= static_cast<double>(m);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < m; ++i) out.normalized[base + i] = (a[base + i] - mu) * inv;
        out.mean[gidx] = mu;
        out.var[gidx] = var;
    }
    return out;
}

Matrix weight_standardize(const Matrix& w, double eps) {
    if (w.cols < 2) throw std::invalid_argument("weight_standardize: need at least 2 columns");
    Matrix out(w.rows, w.cols);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double mean = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) mean += w.at(r, c);
        mean /= static_cast<double>(w.cols);
        double var = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) {
            const double d = w.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(w.cols);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < w.cols; ++c) out.at(r, c) = (w.at(r, c) - mean) * inv;
    }
    return out;
}

std::vector<LayerLinear> network_linears(const NetworkGeometry& g) {
    const std::size_t L = g.spec.layer_count();
    std::vector<LayerLinear> out;
    out.reserve(L - 1);
    for (std::size_t l = 1; l < L; ++l) {
        LayerWeights lw = weight_matrix(g.layers[l - 1], g.layers[l], g.spec.mapping);
        LayerLinear lin;
        lin.w_raw = lw.w;
        lin.dist = std::move(lw.dist);
        lin.dmax = lw.dmax;
        lin.degenerate = lw.degenerate;
        if (g.spec.weight_standardization) {
            lin.w = Matrix(lw.w.rows, lw.w.cols);
            lin.row_mean.resize(lw.w.rows);
            lin.row_inv_std.resize(lw.w.rows);
            for (std::size_t r = 0; r < lw.w.rows; ++r) {
                double mean = 0.0;
                for (std::size_t c = 0; c < lw.w.cols; ++c) mean += lw.w.at(r, c);
                mean /= static_cast<double>(lw.w.cols);
                double var = 0.0;
                for (std::size_t c = 0; c < lw.w.cols; ++c) {
                    const double d = lw.w.at(r, c) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(lw.w.cols);
                const double inv = 1.0 / std::sqrt(var + kNormEpsilon);
                lin.row_mean[r] = mean;
                lin.row_inv_std[r] = inv;
                for (std::size_t c = 0; c < lw.w.cols; ++c)
                    lin.w.at(r, c) = (lw.w.at(r, c) - mean) * inv;
            }
        } else {
            lin.w = std::move(lw.w);
        }
        out.push_back(std::move(lin));
    }
    return out;
}

ForwardTrace forward_with(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
                          std::span<const double> x) {
    if (x.size() != g.spec.input_dim)
        throw std::invalid_argument("forward: input size does not match input_dim");
    ForwardTrace trace;
    trace.input.assign(x.begin(), x.end());
    const std::size_t L = g.spec.layer_count();
    trace.layers.resize(L - 1);
    const std::vector<double>* prev = &trace.input;
    for (std::size_t l = 1; l < L; ++l) {
        const Matrix& w = linears[l - 1].w;
        LayerTrace& t = trace.layers[l - 1];
        const std::size_t width = w.rows;
        t.z.resize(width);
        t.a.resize(width);
        for (std::size_t j = 0; j < width; ++j) {
            double acc = 0.0;
            const auto row = w.row(j);
            for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * (*prev)[i];
            t.z[j] = acc;
            t.a[j] = activate(g.spec.activation, acc);
        }
        if (g.spec.groupnorm) {
            auto gn = groupnorm_forward(t.a, g.spec.group_size_for(width), kNormEpsilon);
            t.a_hat = std::move(gn.normalized);
            t.mu = std::move(gn.mean);
            t.var = std::move(gn.var);
        } else {
            t.a_hat = t.a;
        }
        t.y.resize(width);
        for (std::size_t j = 0; j < width; ++j)
            t.y[j] = g.gamma[l][j] * t.a_hat[j] + g.beta[l][j];
        prev = &t.y;
    }
    trace.probs = softmax(trace.layers.back().y);
    return trace;
}

ForwardTrace forward(const NetworkGeometry& g, std::span<const double> x) {
    return forward_with(g, network_linears(g), x);
}

std::size_t argmax_index(std::span<const double> v) {
    return static_cast<std::size_t>(
        std::distance(v.begin(), std::max_element(v.begin(), v.end())));
}

std::size_t predict(const NetworkGeometry& g, std::span<const double> x) {
    return argmax_index(forward(g, x).probs);
}

}  // namespace debinn
