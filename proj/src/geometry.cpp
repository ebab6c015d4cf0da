#include "debinn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace debinn {

double distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double map_inverse(double d, double dmax) {
    if (!(dmax > 0.0)) throw std::invalid_argument("map_inverse: dmax must be positive");
    return 1.0 - d / dmax;
}

double map_gaussian(double d, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("map_gaussian: sigma must be positive");
    return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

std::size_t NetworkSpec::layer_width(std::size_t layer) const {
    if (layer == 0) return input_dim;
    if (layer <= hidden_widths.size()) return hidden_widths[layer - 1];
    return output_dim;
}

std::size_t NetworkSpec::group_size_for(std::size_t width) const {
    if (group_size == 0 || group_size >= width) return width;
    return group_size;
}

void NetworkSpec::validate() const {
    if (input_dim == 0) throw std::invalid_argument("spec: input_dim must be positive");
    if (hidden_widths.empty() || hidden_widths.size() > 3)
        throw std::invalid_argument("spec: between 1 and 3 hidden layers required");
    for (auto w : hidden_widths)
        if (w == 0) throw std::invalid_argument("spec: hidden layer width must be positive");
    if (output_dim < 2) throw std::invalid_argument("spec: output_dim must be at least 2");
    if (mapping.kind == MappingKind::Gaussian && !(mapping.sigma > 0.0))
        throw std::invalid_argument("spec: gaussian sigma must be positive");
    if (group_size > 0) {
        for (std::size_t l = 1; l < layer_count(); ++l) {
            std::size_t w = layer_width(l);
            if (group_size < w && w % group_size != 0)
                throw std::invalid_argument("spec: group_size must divide every normalized layer width");
        }
    }
    if (weight_standardization) {
        // Standardization needs >= 2 columns in every weight matrix row.
        for (std::size_t l = 0; l + 1 < layer_count(); ++l)
            if (layer_width(l) < 2)
                throw std::invalid_argument(
                    "spec: weight standardization requires fan-in >= 2 on every layer");
    }
    if (l1 < 0.0 || l2 < 0.0) throw std::invalid_argument("spec: l1/l2 must be nonnegative");
}

void NetworkGeometry::validate() const {
    spec.validate();
    const std::size_t L = spec.layer_count();
    if (layers.size() != L || gamma.size() != L || beta.size() != L)
        throw std::invalid_argument("geometry: layer count mismatch");
    for (std::size_t l = 0; l < L; ++l) {
        if (layers[l].size() != spec.layer_width(l))
            throw std::invalid_argument("geometry: layer width mismatch");
        const bool want_soma = l > 0;
        const bool want_axon = l + 1 < L;
        for (const auto& n : layers[l]) {
            if (n.soma.has_value() != want_soma || n.axon.has_value() != want_axon)
                throw std::invalid_argument("geometry: soma/axon roles inconsistent with layer");
        }
        const std::size_t want_norm = l > 0 ? spec.layer_width(l) : 0;
        if (gamma[l].size() != want_norm || beta[l].size() != want_norm)
            throw std::invalid_argument("geometry: gamma/beta size mismatch");
    }
}

LayerWeights weight_matrix(const std::vector<NeuronGeometry>& from,
                           const std::vector<NeuronGeometry>& to, const Mapping& mapping) {
    LayerWeights out;
    const std::size_t rows = to.size();
    const std::size_t cols = from.size();
    Matrix dist(rows, cols);
    double dmax = 0.0;
    for (std::size_t j = 0; j < rows; ++j) {
        if (!to[j].soma) throw std::invalid_argument("weight_matrix: to-neuron missing soma");
        for (std::size_t i = 0; i < cols; ++i) {
            if (!from[i].axon) throw std::invalid_argument("weight_matrix: from-neuron missing axon");
            const double d = distance(*from[i].axon, *to[j].soma);
            dist.at(j, i) = d;
            dmax = std::max(dmax, d);
        }
    }
    out.degenerate = dmax < kDistEpsilon;
    out.dmax = out.degenerate ? kDistEpsilon : dmax;
    out.w = Matrix(rows, cols);
    for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t i = 0; i < cols; ++i)
            out.w.at(j, i) = mapping.kind == MappingKind::Gaussian
                                 ? map_gaussian(dist.at(j, i), mapping.sigma)
                                 : map_inverse(dist.at(j, i), out.dmax);
    out.dist = std::move(dist);
    return out;
}

namespace {

NetworkGeometry make_shell(const NetworkSpec& spec) {
    NetworkGeometry g;
    g.spec = spec;
    const std::size_t L = spec.layer_count();
    g.layers.resize(L);
    g.gamma.resize(L);
    g.beta.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        g.layers[l].resize(spec.layer_width(l));
        for (auto& n : g.layers[l]) {
            if (l > 0) n.soma = Point3{};
            if (l + 1 < L) n.axon = Point3{};
        }
        if (l > 0) {
            g.gamma[l].assign(spec.layer_width(l), 1.0);
            g.beta[l].assign(spec.layer_width(l), 0.0);
        }
    }
    return g;
}

// Golden-angle spiral: n points spread over a sphere of radius r.
Point3 fibonacci_point(std::size_t i, std::size_t n, double r, const Point3& center) {
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const double y = (n == 1) ? 0.0 : 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double ring = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double theta = golden_angle * static_cast<double>(i);
    return {center.x + r * ring * std::cos(theta), center.y + r * y,
            center.z + r * ring * std::sin(theta)};
}

}  // namespace

NetworkGeometry init_geometry(const NetworkSpec& spec, InitScheme scheme, std::uint64_t seed) {
    spec.validate();
    NetworkGeometry g = make_shell(spec);
    const std::size_t L = spec.layer_count();
    const Point3 center{0.5, 0.5, 0.5};

    switch (scheme) {
        case InitScheme::Random: {
            auto rng = make_rng(seed);
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            auto draw = [&] { return Point3{uni(rng), uni(rng), uni(rng)}; };
            for (auto& layer : g.layers)
                for (auto& n : layer) {
                    if (n.soma) n.soma = draw();
                    if (n.axon) n.axon = draw();
                }
            break;
        }
        case InitScheme::Singularity: {
            for (auto& layer : g.layers)
                for (auto& n : layer) {
                    if (n.soma) n.soma = center;
                    if (n.axon) n.axon = center;
                }
            break;
        }
        case InitScheme::Onion: {
            // Endpoint groups in forward order: input axons, then soma/axon
            // pairs of each hidden layer, then output somas.
            const std::size_t groups = 2 * spec.hidden_widths.size() + 2;
            std::size_t group = 0;
            auto place = [&](std::size_t layer, bool soma) {
                const double r = static_cast<double>(group + 1) / static_cast<double>(groups);
                auto& neurons = g.layers[layer];
                for (std::size_t i = 0; i < neurons.size(); ++i) {
                    Point3 p = fibonacci_point(i, neurons.size(), r, center);
                    if (soma)
                        neurons[i].soma = p;
                    else
                        neurons[i].axon = p;
                }
                ++group;
            };
            place(0, false);
            for (std::size_t l = 1; l + 1 < L; ++l) {
                place(l, true);
                place(l, false);
            }
            place(L - 1, true);
            break;
        }
    }
    return g;
}

NetworkGeometry init_geometry(const NetworkSpec& spec, std::uint64_t seed) {
    return init_geometry(spec, spec.init, seed);
}

std::size_t parameter_count(const NetworkSpec& spec) {
    spec.validate();
    std::size_t somas = spec.output_dim;
    std::size_t axons = spec.input_dim;
    for (auto w : spec.hidden_widths) {
        somas += w;
        axons += w;
    }
    return 3 * (somas + axons);
}

std::string geometry_to_csv(const NetworkGeometry& g) {
    std::ostringstream out;
    out << "layer,neuron,role,v0,v1,v2\n";
    for (std::size_t l = 0; l < g.layers.size(); ++l) {
        for (std::size_t i = 0; i < g.layers[l].size(); ++i) {
            const auto& n = g.layers[l][i];
            if (n.soma)
                out << l << ',' << i << ",soma," << fmt_double(n.soma->x) << ','
                    << fmt_double(n.soma->y) << ',' << fmt_double(n.soma->z) << '\n';
            if (n.axon)
                out << l << ',' << i << ",axon," << fmt_double(n.axon->x) << ','
                    << fmt_double(n.axon->y) << ',' << fmt_double(n.axon->z) << '\n';
        }
        for (std::size_t i = 0; i < g.gamma[l].size(); ++i)
            out << l << ',' << i << ",norm," << fmt_double(g.gamma[l][i]) << ','
                << fmt_double(g.beta[l][i]) << ",0\n";
    }
    return out.str();
}

NetworkGeometry geometry_from_csv(const std::string& text, const NetworkSpec& spec) {
    NetworkGeometry g = make_shell(spec);
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || lineno == 1) continue;  // header
        auto fields = split(line, ',');
        if (fields.size() != 6)
            throw std::invalid_argument("geometry csv: line " + std::to_string(lineno) +
                                        ": expected 6 fields");
        const auto l = static_cast<std::size_t>(parse_int(fields[0], "geometry csv layer"));
        const auto i = static_cast<std::size_t>(parse_int(fields[1], "geometry csv neuron"));
        if (l >= g.layers.size() || i >= g.layers[l].size())
            throw std::invalid_argument("geometry csv: line " + std::to_string(lineno) +
                                        ": index out of range");
        const std::string role = trim(fields[2]);
        const double v0 = parse_double(fields[3], "geometry csv v0");
        const double v1 = parse_double(fields[4], "geometry csv v1");
        const double v2 = parse_double(fields[5], "geometry csv v2");
        if (role == "soma") {
            if (!g.layers[l][i].soma)
                throw std::invalid_argument("geometry csv: unexpected soma at layer " +
                                            std::to_string(l));
            g.layers[l][i].soma = Point3{v0, v1, v2};
        } else if (role == "axon") {
            if (!g.layers[l][i].axon)
                throw std::invalid_argument("geometry csv: unexpected axon at layer " +
                                            std::to_string(l));
            g.layers[l][i].axon = Point3{v0, v1, v2};
        } else if (role == "norm") {
            if (l == 0 || i >= g.gamma[l].size())
                throw std::invalid_argument("geometry csv: unexpected norm row");
            g.gamma[l][i] = v0;
            g.beta[l][i] = v1;
        } else {
            throw std::invalid_argument("geometry csv: unknown role '" + role + "'");
        }
    }
    g.validate();
    return g;
}

const char* to_string(MappingKind k) { return k == MappingKind::Gaussian ? "gaussian" : "inverse"; }

const char* to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Sigmoid: return "sigmoid";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::ReLU: return "relu";
    }
    return "?";
}

const char* to_string(InitScheme s) {
    switch (s) {
        case InitScheme::Random: return "random";
        case InitScheme::Onion: return "onion";
        case InitScheme::Singularity: return "singularity";
    }
    return "?";
}

}  // namespace debinn
