#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "debinn/data.hpp"
#include "debinn/geometry.hpp"
#include "debinn/loss.hpp"

namespace debinn {

/// Chromosome layout: soma coordinates (layers 1..L, x,y,z per neuron), then
/// axon coordinates (layers 0..L-1), then per layer gamma then beta. The
/// first parameter_count(spec) genes are spatial and clamp to [0,1] under
/// mutation; gamma/beta genes are unclamped.
using Genome = std::vector<double>;

std::size_t genome_length(const NetworkSpec& spec);

Genome encode(const NetworkGeometry& g);
NetworkGeometry decode(const Genome& genome, const NetworkSpec& spec);

struct GAConfig {
    std::size_t population = 0;  // 0 = AUTO
    std::size_t generations = 100;
    std::size_t tournament_k = 3;
    double mutation_rate = 0.05;
    double mutation_scale = 0.1;
    double crossover_prob = 0.5;  // per-gene parent choice; fixed at 0.5
    std::size_t elitism = 1;
    std::uint64_t seed = 1;
    std::size_t threads = 0;  // 0 = hardware concurrency

    std::size_t resolved_population(std::size_t genome_len) const;
    void validate() const;
};

/// Population default when configured as AUTO: max(50, round(2 sqrt(len))).
std::size_t auto_population_size(std::size_t genome_len);

/// Weighted cross-entropy over the batch plus the L1/L2 penalty.
double fitness(const Genome& genome, const NetworkSpec& spec, const Dataset& batch,
               const ClassWeights& beta);

/// Samples k distinct candidates uniformly; returns the index of the fittest
/// (minimal fitness, ties toward the lowest index).
std::size_t tournament_select(std::span<const double> fitnesses, std::size_t k,
                              std::mt19937_64& rng);

/// Uniform crossover: each gene from either parent with probability 1/2.
Genome crossover(const Genome& p1, const Genome& p2, std::mt19937_64& rng);

/// Each gene independently perturbed by N(0, scale^2) with probability
/// `rate`; genes below `spatial_genes` clamp to [0,1].
Genome mutate(const Genome& genome, std::size_t spatial_genes, double rate, double scale,
              std::mt19937_64& rng);

struct GARow {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double train_bacc = 0.0;
    double test_bacc = 0.0;
};

struct GAResult {
    NetworkGeometry best;
    double best_fitness = 0.0;
    std::vector<GARow> history;
};

/// Evolves a population of coordinate chromosomes: elites copied, the rest
/// bred via tournament -> crossover -> mutation. Fitness is evaluated on the
/// full training split each generation; returns the best individual seen.
GAResult train_ga(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                  const GAConfig& config, const ClassWeights& beta);

}  // namespace debinn
