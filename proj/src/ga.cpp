#include "debinn/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "debinn/eval.hpp"
#include "debinn/forward.hpp"

namespace debinn {

std::size_t genome_length(const NetworkSpec& spec) {
    std::size_t norm_neurons = spec.output_dim;
    for (auto w : spec.hidden_widths) norm_neurons += w;
    return parameter_count(spec) + 2 * norm_neurons;
}

Genome encode(const NetworkGeometry& g) {
    g.validate();
    Genome out;
    out.reserve(genome_length(g.spec));
    auto push = [&out](const Point3& p) {
        out.push_back(p.x);
        out.push_back(p.y);
        out.push_back(p.z);
    };
    const std::size_t L = g.spec.layer_count();
    for (std::size_t l = 1; l < L; ++l)
        for (const auto& n : g.layers[l]) push(*n.soma);
    for (std::size_t l = 0; l + 1 < L; ++l)
        for (const auto& n : g.layers[l]) push(*n.axon);
    for (std::size_t l = 1; l < L; ++l) {
        out.insert(out.end(), g.gamma[l].begin(), g.gamma[l].end());
        out.insert(out.end(), g.beta[l].begin(), g.beta[l].end());
    }
    return out;
}

NetworkGeometry decode(const Genome& genome, const NetworkSpec& spec) {
    if (genome.size() != genome_length(spec))
        throw std::invalid_argument("decode: genome length mismatch");
    NetworkGeometry g = init_geometry(spec, InitScheme::Singularity, 0);
    std::size_t pos = 0;
    auto take = [&]() {
        Point3 p{genome[pos], genome[pos + 1], genome[pos + 2]};
        pos += 3;
        return p;
    };
    const std::size_t L = spec.layer_count();
    for (std::size_t l = 1; l < L; ++l)
        for (auto& n : g.layers[l]) n.soma = take();
    for (std::size_t l = 0; l + 1 < L; ++l)
        for (auto& n : g.layers[l]) n.axon = take();
    for (std::size_t l = 1; l < L; ++l) {
        for (auto& v : g.gamma[l]) v = genome[pos++];
        for (auto& v : g.beta[l]) v = genome[pos++];
    }
    return g;
}

std::size_t auto_population_size(std::size_t genome_len) {
    if (genome_len == 0) throw std::invalid_argument("auto_population_size: zero length");
    const auto scaled =
        static_cast<std::size_t>(std::llround(2.0 * std::sqrt(static_cast<double>(genome_len))));
    return std::max<std::size_t>(50, scaled);
}

std::size_t GAConfig::resolved_population(std::size_t genome_len) const {
    return population == 0 ? auto_population_size(genome_len) : population;
}

void GAConfig::validate() const {
    if (tournament_k < 1) throw std::invalid_argument("ga: tournament_k must be >= 1");
    if (population != 0 && tournament_k > population)
        throw std::invalid_argument("ga: tournament_k exceeds population");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw std::invalid_argument("ga: mutation_rate must be in [0,1]");
    if (!(mutation_scale > 0.0)) throw std::invalid_argument("ga: mutation_scale must be positive");
    if (crossover_prob != 0.5)
        throw std::invalid_argument("ga: crossover_prob is fixed at 0.5");
    if (elitism < 1) throw std::invalid_argument("ga: elitism must be >= 1");
    if (population != 0 && elitism >= population)
        throw std::invalid_argument("ga: elitism must leave room for offspring");
}

double fitness(const Genome& genome, const NetworkSpec& spec, const Dataset& batch,
               const ClassWeights& beta) {
    const NetworkGeometry g = decode(genome, spec);
    const auto linears = network_linears(g);
    return evaluate_batch(g, linears, batch, beta).data_loss +
           l1_l2_penalty(linears, spec.l1, spec.l2);
}

std::size_t tournament_select(std::span<const double> fitnesses, std::size_t k,
                              std::mt19937_64& rng) {
    const std::size_t n = fitnesses.size();
    if (k == 0 || k > n) throw std::invalid_argument("tournament_select: bad k");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    while (chosen.size() < k) {
        const std::size_t c = pick(rng);
        if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
    }
    std::size_t best = chosen[0];
    for (std::size_t i = 1; i < k; ++i) {
        const std::size_t c = chosen[i];
        if (fitnesses[c] < fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best))
            best = c;
    }
    return best;
}

Genome crossover(const Genome& p1, const Genome& p2, std::mt19937_64& rng) {
    if (p1.size() != p2.size()) throw std::invalid_argument("crossover: length mismatch");
    Genome child(p1.size());
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < p1.size(); ++i) child[i] = coin(rng) ? p1[i] : p2[i];
    return child;
}

Genome mutate(const Genome& genome, std::size_t spatial_genes, double rate, double scale,
              std::mt19937_64& rng) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("mutate: rate must be in [0,1]");
    if (!(scale > 0.0)) throw std::invalid_argument("mutate: scale must be positive");
    Genome out = genome;
    std::bernoulli_distribution hit(rate);
    std::normal_distribution<double> noise(0.0, scale);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (rate > 0.0 && hit(rng)) {
            out[i] += noise(rng);
            if (i < spatial_genes) out[i] = std::clamp(out[i], 0.0, 1.0);
        }
    }
    return out;
}

namespace {

double bacc_of(const NetworkGeometry& g, const std::vector<LayerLinear>& linears,
               const Dataset& d, const ClassWeights& beta) {
    const auto eval = evaluate_batch(g, linears, d, beta);
    return balanced_accuracy(confusion(d.y, eval.predictions, d.classes));
}

}  // namespace

GAResult train_ga(const NetworkSpec& spec, const Dataset& train, const Dataset& test,
                  const GAConfig& config, const ClassWeights& beta) {
    spec.validate();
    config.validate();
    train.validate();
    test.validate();
    const std::size_t len = genome_length(spec);
    const std::size_t spatial = parameter_count(spec);
    const std::size_t pop_size = config.resolved_population(len);
    if (config.tournament_k > pop_size || config.elitism >= pop_size)
        throw std::invalid_argument("ga: tournament_k/elitism inconsistent with AUTO population");

    std::vector<Genome> population;
    population.reserve(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i)
        population.push_back(encode(init_geometry(spec, spec.init, derive_seed(config.seed, i))));

    auto rng = make_rng(derive_seed(config.seed, 0xB0551));
    std::vector<double> fitnesses(pop_size, 0.0);

    GAResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();
    Genome best_genome;

    for (std::size_t gen = 0;; ++gen) {
        parallel_for(pop_size, config.threads, [&](std::size_t i) {
            fitnesses[i] = fitness(population[i], spec, train, beta);
        });

        std::size_t gen_best = 0;
        double mean = 0.0;
        for (std::size_t i = 0; i < pop_size; ++i) {
            mean += fitnesses[i];
            if (fitnesses[i] < fitnesses[gen_best]) gen_best = i;
        }
        mean /= static_cast<double>(pop_size);
        if (fitnesses[gen_best] < result.best_fitness) {
            result.best_fitness = fitnesses[gen_best];
            best_genome = population[gen_best];
        }

        const NetworkGeometry best_geom = decode(population[gen_best], spec);
        const auto best_linears = network_linears(best_geom);
        result.history.push_back({gen, fitnesses[gen_best], mean,
                                  bacc_of(best_geom, best_linears, train, beta),
                                  bacc_of(best_geom, best_linears, test, beta)});

        if (gen == config.generations) break;

        // Reproduce: elites in fitness order, offspring by tournament.
        std::vector<std::size_t> order(pop_size);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fitnesses[a] != fitnesses[b] ? fitnesses[a] < fitnesses[b] : a < b;
        });
        std::vector<Genome> next;
        next.reserve(pop_size);
        for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(population[order[e]]);
        while (next.size() < pop_size) {
            const std::size_t a = tournament_select(fitnesses, config.tournament_k, rng);
            const std::size_t b = tournament_select(fitnesses, config.tournament_k, rng);
            Genome child = crossover(population[a], population[b], rng);
            next.push_back(
                mutate(child, spatial, config.mutation_rate, config.mutation_scale, rng));
        }
        population.swap(next);
    }

    result.best = decode(best_genome, spec);
    return result;
}

}  // namespace debinn
