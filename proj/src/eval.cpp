#include "debinn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "debinn/util.hpp"

namespace debinn {

long long ConfusionMatrix::row_sum(int truth) const {
    long long s = 0;
    for (int p = 0; p < classes; ++p) s += at(truth, p);
    return s;
}

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, int classes) {
    if (truth.size() != pred.size()) throw std::invalid_argument("confusion: size mismatch");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= classes || pred[i] < 0 || pred[i] >= classes)
            throw std::invalid_argument("confusion: label out of range");
        cm.at(truth[i], pred[i])++;
    }
    return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
    double sum = 0.0;
    for (int c = 0; c < cm.classes; ++c) {
        const long long n = cm.row_sum(c);
        if (n == 0) throw std::invalid_argument("balanced_accuracy: empty true class");
        sum += static_cast<double>(cm.at(c, c)) / static_cast<double>(n);
    }
    return sum / cm.classes;
}

namespace {

SeSp one_vs_rest(const ConfusionMatrix& cm, int pos) {
    long long tp = cm.at(pos, pos);
    long long fn = cm.row_sum(pos) - tp;
    long long tn = 0, fp = 0;
    for (int t = 0; t < cm.classes; ++t) {
        if (t == pos) continue;
        for (int p = 0; p < cm.classes; ++p) {
            if (p == pos)
                fp += cm.at(t, p);
            else
                tn += cm.at(t, p);
        }
    }
    if (tp + fn == 0 || tn + fp == 0)
        throw std::invalid_argument("sensitivity_specificity: zero denominator");
    return {static_cast<double>(tp) / static_cast<double>(tp + fn),
            static_cast<double>(tn) / static_cast<double>(tn + fp)};
}

}  // namespace

SeSp sensitivity_specificity(const ConfusionMatrix& cm, int positive_class) {
    if (cm.classes == 2) return one_vs_rest(cm, positive_class);
    SeSp acc;
    for (int c = 0; c < cm.classes; ++c) {
        const SeSp s = one_vs_rest(cm, c);
        acc.se += s.se;
        acc.sp += s.sp;
    }
    acc.se /= cm.classes;
    acc.sp /= cm.classes;
    return acc;
}

SweepStats sweep_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sweep_stats: empty");
    SweepStats s;
    s.n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = s.n % 2 == 1 ? sorted[s.n / 2] : 0.5 * (sorted[s.n / 2 - 1] + sorted[s.n / 2]);
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

namespace {

// Null distribution of U as counts over u = 0..n1*n2, via a subset-sum
// dynamic program over ranks: dist[k][s] = number of k-subsets of {1..n}
// with rank sum s.
std::vector<double> exact_u_distribution(std::size_t n1, std::size_t n2) {
    const std::size_t n = n1 + n2;
    const std::size_t smax = n * (n + 1) / 2;
    std::vector<std::vector<double>> dist(n1 + 1, std::vector<double>(smax + 1, 0.0));
    dist[0][0] = 1.0;
    for (std::size_t rank = 1; rank <= n; ++rank)
        for (std::size_t k = std::min(rank, n1); k >= 1; --k)
            for (std::size_t s = smax; s >= rank; --s)
                if (dist[k - 1][s - rank] > 0.0) dist[k][s] += dist[k - 1][s - rank];
    // U = ranksum - n1(n1+1)/2.
    const std::size_t offset = n1 * (n1 + 1) / 2;
    const std::size_t umax = n1 * n2;
    std::vector<double> u_counts(umax + 1, 0.0);
    for (std::size_t s = offset; s <= smax; ++s) {
        const std::size_t u = s - offset;
        if (u <= umax) u_counts[u] = dist[n1][s];
    }
    return u_counts;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    const std::size_t n1 = xs.size(), n2 = ys.size(), n = n1 + n2;

    struct Entry {
        double v;
        bool from_x;
    };
    std::vector<Entry> all;
    all.reserve(n);
    for (double v : xs) all.push_back({v, true});
    for (double v : ys) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.v < b.v; });

    // Midranks, plus the tie-correction sum over tie groups.
    std::vector<double> rank(n);
    double tie_correction = 0.0;
    bool has_ties = false;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && all[j + 1].v == all[i].v) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) rank[k] = mid;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            has_ties = true;
            tie_correction += t * t * t - t;
        }
        i = j + 1;
    }
    double rank_sum_x = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (all[k].from_x) rank_sum_x += rank[k];
    const double u = rank_sum_x - static_cast<double>(n1) * (n1 + 1) / 2.0;

    MannWhitneyResult res;
    res.u = u;
    if (n <= 16 && !has_ties) {
        res.exact = true;
        const auto counts = exact_u_distribution(n1, n2);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto ui = static_cast<std::size_t>(std::llround(u));
        double below = 0.0, above = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (k <= ui) below += counts[k];
            if (k >= ui) above += counts[k];
        }
        res.p = std::min(1.0, 2.0 * std::min(below, above) / total);
        return res;
    }
    const double mean = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    const double nn = static_cast<double>(n);
    double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                 ((nn + 1.0) - tie_correction / (nn * (nn - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0;  // all observations tied
        return res;
    }
    const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
    res.p = std::min(1.0, 2.0 * normal_sf(z));
    return res;
}

double LabelGrid::x_at(std::size_t i) const {
    return resolution < 2 ? bounds.xmin
                          : bounds.xmin + (bounds.xmax - bounds.xmin) * static_cast<double>(i) /
                                static_cast<double>(resolution - 1);
}

double LabelGrid::y_at(std::size_t j) const {
    return resolution < 2 ? bounds.ymin
                          : bounds.ymin + (bounds.ymax - bounds.ymin) * static_cast<double>(j) /
                                static_cast<double>(resolution - 1);
}

LabelGrid decision_grid(const Classifier2D& clf, const Bounds2D& bounds, std::size_t resolution) {
    if (resolution < 2) throw std::invalid_argument("decision_grid: resolution must be >= 2");
    LabelGrid g;
    g.resolution = resolution;
    g.bounds = bounds;
    g.labels.resize(resolution * resolution);
    for (std::size_t j = 0; j < resolution; ++j)
        for (std::size_t i = 0; i < resolution; ++i)
            g.labels[j * resolution + i] = clf(g.x_at(i), g.y_at(j));
    return g;
}

double misclassified_area_fraction(const LabelGrid& grid, const LabelGrid& truth) {
    if (grid.labels.size() != truth.labels.size() || grid.resolution != truth.resolution)
        throw std::invalid_argument("misclassified_area_fraction: shape mismatch");
    std::size_t bad = 0;
    for (std::size_t i = 0; i < grid.labels.size(); ++i)
        if (grid.labels[i] != truth.labels[i]) ++bad;
    return static_cast<double>(bad) / static_cast<double>(grid.labels.size());
}

std::string grid_to_csv(const LabelGrid& grid) {
    std::ostringstream out;
    out << "x,y,label\n";
    for (std::size_t j = 0; j < grid.resolution; ++j)
        for (std::size_t i = 0; i < grid.resolution; ++i)
            out << fmt_double(grid.x_at(i)) << ',' << fmt_double(grid.y_at(j)) << ','
                << grid.labels[j * grid.resolution + i] << '\n';
    return out.str();
}

std::string confusion_to_csv(const ConfusionMatrix& cm, const std::vector<std::string>& names) {
    std::ostringstream out;
    auto name = [&](int c) {
        return static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)]
                                                          : "class" + std::to_string(c);
    };
    out << "true\\pred";
    for (int p = 0; p < cm.classes; ++p) out << ',' << name(p);
    out << '\n';
    for (int t = 0; t < cm.classes; ++t) {
        out << name(t);
        for (int p = 0; p < cm.classes; ++p) out << ',' << cm.at(t, p);
        out << '\n';
    }
    return out.str();
}

}  // namespace debinn
