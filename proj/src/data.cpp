#include "debinn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "debinn/util.hpp"

namespace debinn {

void Dataset::validate() const {
    if (rows == 0) throw std::invalid_argument("dataset: empty");
    if (x.size() != rows * cols || y.size() != rows)
        throw std::invalid_argument("dataset: shape mismatch");
    if (classes < 2) throw std::invalid_argument("dataset: need at least 2 classes");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature");
    for (int label : y)
        if (label < 0 || label >= classes)
            throw std::invalid_argument("dataset: label out of range");
}

namespace {

// Paper split puts 6 extra samples in class 0 (406/394 of 800, 106/94 of
// 200); tiny sets fall back to an even split.
std::size_t class0_count(std::size_t n) {
    const std::size_t half = n / 2;
    return n >= 100 ? half + 6 : (n + 1) / 2;
}

Dataset make_moons_split(std::size_t n, double noise_std, std::mt19937_64& rng,
                         const std::string& split) {
    Dataset d;
    d.rows = n;
    d.cols = 2;
    d.classes = 2;
    d.feature_names = {"x", "y"};
    d.split = split;
    d.x.reserve(2 * n);
    d.y.reserve(n);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n0 = class0_count(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = i < n0 ? 0 : 1;
        const double t = angle(rng);
        double px, py;
        if (cls == 0) {
            px = std::cos(t);
            py = std::sin(t);
        } else {
            px = 1.0 - std::cos(t);
            py = 0.5 - std::sin(t);
        }
        px += noise_std * noise(rng);
        py += noise_std * noise(rng);
        d.x.push_back(px);
        d.x.push_back(py);
        d.y.push_back(cls);
    }
    return d;
}

// Distance from p to the upper unit arc {(cos t, sin t) : t in [0, pi]}.
double upper_arc_distance(double px, double py) {
    if (py >= 0.0) return std::abs(std::sqrt(px * px + py * py) - 1.0);
    const double d1 = std::hypot(px - 1.0, py);
    const double d2 = std::hypot(px + 1.0, py);
    return std::min(d1, d2);
}

}  // namespace

TwoMoons gen_two_moons(std::size_t n_train, std::size_t n_test, double noise_std,
                       std::uint64_t seed) {
    if (n_train == 0 || n_test == 0) throw std::invalid_argument("gen_two_moons: counts > 0");
    auto rng = make_rng(seed);
    TwoMoons out;
    out.train = make_moons_split(n_train, noise_std, rng, "train");
    out.test = make_moons_split(n_test, noise_std, rng, "test");
    return out;
}

int two_moons_true_class(double px, double py) {
    const double d0 = upper_arc_distance(px, py);
    const double d1 = upper_arc_distance(1.0 - px, 0.5 - py);
    return d0 <= d1 ? 0 : 1;
}

namespace {

std::string strip_bom(std::string s) {
    if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
        static_cast<unsigned char>(s[1]) == 0xBB && static_cast<unsigned char>(s[2]) == 0xBF)
        return s.substr(3);
    return s;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& label_column,
                  const std::vector<std::string>& class_names, const std::string& what) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(what + ": empty file");
    line = strip_bom(line);
    auto header = split(trim(line), ',');
    for (auto& h : header) h = trim(h);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size())
        throw std::invalid_argument(what + ": label column '" + label_column + "' not found");

    Dataset d;
    d.cols = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != label_idx) d.feature_names.push_back(header[i]);

    std::map<std::string, int> label_map;
    for (std::size_t i = 0; i < class_names.size(); ++i)
        label_map[class_names[i]] = static_cast<int>(i);

    std::vector<std::string> raw_labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != header.size())
            throw std::invalid_argument(what + ": row " + std::to_string(lineno) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_idx) {
                raw_labels.push_back(trim(fields[i]));
            } else {
                d.x.push_back(parse_double(
                    fields[i], what + ": row " + std::to_string(lineno) + ", column '" +
                                   header[i] + "'"));
            }
        }
        ++d.rows;
    }
    if (d.rows == 0) throw std::invalid_argument(what + ": no data rows");

    if (class_names.empty()) {
        std::vector<std::string> uniq(raw_labels);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (std::size_t i = 0; i < uniq.size(); ++i) label_map[uniq[i]] = static_cast<int>(i);
    }
    d.classes = static_cast<int>(label_map.size());
    d.y.reserve(d.rows);
    for (std::size_t k = 0; k < raw_labels.size(); ++k) {
        auto it = label_map.find(raw_labels[k]);
        if (it == label_map.end())
            throw std::invalid_argument(what + ": unknown class label '" + raw_labels[k] + "'");
        d.y.push_back(it->second);
    }
    d.validate();
    return d;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::vector<std::string>& class_names) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("load_csv: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), label_column, class_names, path);
}

std::string dataset_to_csv(const Dataset& d, const std::string& label_column,
                           const std::vector<std::string>& class_names) {
    std::ostringstream out;
    for (std::size_t i = 0; i < d.cols; ++i) {
        const std::string name =
            i < d.feature_names.size() ? d.feature_names[i] : "f" + std::to_string(i);
        out << name << ',';
    }
    out << label_column << '\n';
    for (std::size_t r = 0; r < d.rows; ++r) {
        for (double v : d.row(r)) out << fmt_double(v) << ',';
        const auto label = static_cast<std::size_t>(d.y[r]);
        if (label < class_names.size())
            out << class_names[label];
        else
            out << d.y[r];
        out << '\n';
    }
    return out.str();
}

void save_csv(const Dataset& d, const std::string& path, const std::string& label_column,
              const std::vector<std::string>& class_names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("save_csv: cannot open '" + path + "' for writing");
    out << dataset_to_csv(d, label_column, class_names);
}

StandardizationParams standardize(Dataset& train, Dataset* test) {
    train.validate();
    StandardizationParams p;
    p.mean.resize(train.cols);
    p.stddev.resize(train.cols);
    const double n = static_cast<double>(train.rows);
    for (std::size_t c = 0; c < train.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < train.rows; ++r) mean += train.x[r * train.cols + c];
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < train.rows; ++r) {
            const double d = train.x[r * train.cols + c] - mean;
            var += d * d;
        }
        var /= n;
        double sd = std::sqrt(var);
        if (sd < 1e-12) {
            sd = 1.0;
            const std::string name = c < train.feature_names.size() ? train.feature_names[c]
                                                                    : "f" + std::to_string(c);
            p.warnings.push_back("constant feature '" + name + "' left unscaled (std = 0)");
        }
        p.mean[c] = mean;
        p.stddev[c] = sd;
    }
    auto apply = [&](Dataset& d) {
        if (d.cols != train.cols) throw std::invalid_argument("standardize: column mismatch");
        for (std::size_t r = 0; r < d.rows; ++r)
            for (std::size_t c = 0; c < d.cols; ++c) {
                double& v = d.x[r * d.cols + c];
                v = (v - p.mean[c]) / p.stddev[c];
            }
    };
    apply(train);
    if (test) apply(*test);
    return p;
}

std::vector<long long> class_counts(const Dataset& d) {
    std::vector<long long> counts(static_cast<std::size_t>(d.classes), 0);
    for (int label : d.y) counts[static_cast<std::size_t>(label)]++;
    return counts;
}

}  // namespace debinn
