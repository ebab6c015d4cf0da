#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "debinn/util.hpp"

namespace debinn {

// Degenerate-geometry fallback distance (singularity init collapses all points).
constexpr double kDistEpsilon = 1e-12;
// Stability constant shared by groupnorm and weight standardization.
constexpr double kNormEpsilon = 1e-5;

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Point3& a, const Point3& b);

enum class MappingKind { Gaussian, Inverse };
enum class ActivationKind { Sigmoid, Tanh, ReLU };
enum class InitScheme { Random, Onion, Singularity };

struct Mapping {
    MappingKind kind = MappingKind::Gaussian;
    double sigma = 0.5;  // gaussian width, normalized-space units
};

/// Distance-to-weight mappings. `map_inverse` is 1 - d/dmax, not clamped;
/// `map_gaussian` is exp(-d^2 / (2 sigma^2)).
double map_inverse(double d, double dmax);
double map_gaussian(double d, double sigma);

/// Architecture description plus trainer-relevant toggles.
struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_widths;  // 1 to 3 layers
    std::size_t output_dim = 2;
    Mapping mapping;
    ActivationKind activation = ActivationKind::Sigmoid;
    InitScheme init = InitScheme::Random;
    bool groupnorm = true;
    std::size_t group_size = 0;  // 0 = whole layer (single group)
    bool weight_standardization = false;
    double l1 = 0.0;
    double l2 = 0.0;

    std::size_t layer_count() const { return hidden_widths.size() + 2; }
    std::size_t layer_width(std::size_t layer) const;
    // Effective group size for a normalized layer of the given width.
    std::size_t group_size_for(std::size_t width) const;

    void validate() const;  // throws std::invalid_argument
};

/// One neuron's spatial endpoints. Input-layer neurons carry only an axon
/// terminal, output-layer neurons only a soma, hidden neurons both.
struct NeuronGeometry {
    std::optional<Point3> soma;
    std::optional<Point3> axon;
};

/// Full trainable state: endpoint positions plus per-neuron gamma/beta for
/// every non-input layer (present whether or not groupnorm is enabled).
struct NetworkGeometry {
    NetworkSpec spec;
    std::vector<std::vector<NeuronGeometry>> layers;  // [layer][neuron]
    std::vector<std::vector<double>> gamma;           // [layer][neuron], empty for layer 0
    std::vector<std::vector<double>> beta;

    void validate() const;
};

/// Weights for one layer pair, W[to][from] = mapping(distance(axon, soma)).
/// For the inverse mapping, dmax is the max distance over this layer pair in
/// the current geometry; all-coincident points fall back to kDistEpsilon and
/// set `degenerate`.
struct LayerWeights {
    Matrix w;
    Matrix dist;  // axon-to-soma distances behind each weight
    double dmax = 0.0;
    bool degenerate = false;
};

LayerWeights weight_matrix(const std::vector<NeuronGeometry>& from,
                           const std::vector<NeuronGeometry>& to, const Mapping& mapping);

/// Builds the initial geometry for `scheme`:
///  - Random: i.i.d. uniform in the unit cube
///  - Onion: endpoint groups (input axons, layer-1 somas, layer-1 axons, ...,
///    output somas) on nested spheres of radius (k+1)/G around the cube
///    center, Fibonacci-spiral spread
///  - Singularity: everything at the cube center
NetworkGeometry init_geometry(const NetworkSpec& spec, InitScheme scheme, std::uint64_t seed);
NetworkGeometry init_geometry(const NetworkSpec& spec, std::uint64_t seed);

/// Spatial parameter count: 3 * (#somas + #axon terminals).
std::size_t parameter_count(const NetworkSpec& spec);

/// Flat CSV export/import: layer,neuron,role,v0,v1,v2 with role soma/axon
/// (v = x,y,z) or norm (v0 = gamma, v1 = beta). Round-trips bitwise.
std::string geometry_to_csv(const NetworkGeometry& g);
NetworkGeometry geometry_from_csv(const std::string& text, const NetworkSpec& spec);

const char* to_string(MappingKind k);
const char* to_string(ActivationKind k);
const char* to_string(InitScheme s);

}  // namespace debinn
