#include "treenet/evaluate.hpp"

#include <cmath>
#include <string>

#include "treenet/error.hpp"

namespace treenet {

namespace {

std::vector<double> level_scales(int levels, double lambda) {
    std::vector<double> scales(levels + 1, 0.0);
    for (int level = 1; level <= levels; ++level) scales[level] = level_scale(level, lambda);
    return scales;
}

struct StreamingWalk {
    const WeightDistribution& weights;
    const std::vector<double>& scales;
    int arity;
    int depth;
    RngStream& rng;

    double subtree(int level) const {
        const double r = scales[level] * weights.sample(rng);
        if (level == depth) return r;
        double conductance = 0.0;
        for (int c = 0; c < arity; ++c) conductance += 1.0 / subtree(level + 1);
        return r + 1.0 / conductance;
    }
};

std::int64_t regular_edge_count(int arity, int n) {
    std::int64_t total = 0, width = 1;
    for (int level = 1; level <= n; ++level) {
        total += width;
        if (total > kExplicitEdgeGuard * 4) return total;
        width *= arity;
    }
    return total;
}

struct ExplicitBuilder {
    const TreeModel& model;
    int edge_levels;
    std::int64_t guard;
    RngStream& rng;
    std::vector<std::int32_t> parents;
    std::vector<double> weights;

    void grow(std::int32_t parent, int level) {
        if (static_cast<std::int64_t>(parents.size()) >= guard) {
            throw GuardError("explicit tree exceeds the memory guard of " + std::to_string(guard) +
                             " edges (realized " + std::to_string(parents.size() + 1) + "+ edges)");
        }
        const auto self = static_cast<std::int32_t>(parents.size());
        parents.push_back(parent);
        weights.push_back(model.weights().sample(rng));
        if (level == edge_levels) return;
        const int kids = model.is_regular() ? model.arity() : model.offspring().sample(rng);
        for (int c = 0; c < kids; ++c) grow(self, level + 1);
    }
};

}  // namespace

ResistanceSample resistance_streaming(const TreeModel& model, int n, RngStream& rng) {
    if (!model.is_regular()) throw ValidationError("streaming evaluation requires a regular tree model");
    if (n < 1) throw ValidationError("depth n must be >= 1");
    const auto scales = level_scales(n, model.lambda());
    const StreamingWalk walk{model.weights(), scales, model.arity(), n, rng};
    const double r = walk.subtree(1);
    return {n, rng.stream_index(), r, 1.0 / r};
}

SampledTree sample_tree_explicit(const TreeModel& model, int n, RngStream& rng, std::int64_t edge_guard) {
    if (n < 1) throw ValidationError("depth n must be >= 1");
    const int levels = model.edge_levels(n);
    level_scale(levels, model.lambda());  // depth-cap check before any work
    if (model.is_regular()) {
        const std::int64_t count = regular_edge_count(model.arity(), n);
        if (count > edge_guard) {
            throw GuardError("regular tree with arity " + std::to_string(model.arity()) + " and depth " +
                             std::to_string(n) + " has " + std::to_string(count) +
                             " edges, above the memory guard of " + std::to_string(edge_guard));
        }
    }
    ExplicitBuilder builder{model, levels, edge_guard, rng, {}, {}};
    builder.grow(-1, 1);
    return SampledTree::build(std::move(builder.parents), std::move(builder.weights), model.lambda(),
                              model.arity());
}

std::vector<double> subtree_resistances(const SampledTree& tree) {
    std::vector<double> resistance(tree.size());
    for (std::size_t i = tree.size(); i-- > 0;) {
        const double r = tree.edge(i).resistance;
        if (tree.is_leaf(i)) {
            resistance[i] = r;
            continue;
        }
        double conductance = 0.0;
        for (const std::int32_t c : tree.children(i)) conductance += 1.0 / resistance[c];
        resistance[i] = r + 1.0 / conductance;
    }
    return resistance;
}

ResistanceSample resistance_of_tree(const SampledTree& tree) {
    const double r = subtree_resistances(tree)[0];
    return {tree.arity() > 0 ? tree.edge_levels() : tree.edge_levels() - 1, 0, r, 1.0 / r};
}

std::vector<std::int64_t> gw_generations(const OffspringLaw& offspring, int n, RngStream& rng,
                                         std::int64_t population_guard) {
    if (n < 0) throw ValidationError("generation count must be >= 0");
    std::vector<std::int64_t> z{1};
    std::int64_t total = 1;
    for (int i = 0; i < n; ++i) {
        std::int64_t next = 0;
        for (std::int64_t k = 0; k < z.back(); ++k) next += offspring.sample(rng);
        total += next;
        if (total > population_guard) {
            throw GuardError("Galton-Watson population " + std::to_string(total) + " exceeds the guard of " +
                             std::to_string(population_guard));
        }
        z.push_back(next);
    }
    return z;
}

std::vector<std::int64_t> tree_generations(const SampledTree& tree) { return tree.level_counts(); }

double gw_shorted_resistance(std::span<const std::int64_t> generations, double lambda) {
    double total = 0.0, scale = 1.0;
    for (const std::int64_t z : generations) {
        if (z < 1) throw ValidationError("generation sizes must be >= 1");
        total += scale / static_cast<double>(z);
        scale *= lambda;
    }
    return total;
}

double level_shorted_resistance(const SampledTree& tree) {
    std::vector<double> conductance(tree.edge_levels(), 0.0);
    for (const auto& e : tree.edges()) conductance[e.level - 1] += 1.0 / e.resistance;
    double total = 0.0;
    for (const double c : conductance) total += 1.0 / c;
    return total;
}

double gw_w_estimate(std::int64_t z_n, double lambda, int n) {
    if (n < 1) throw ValidationError("gw_w_estimate requires n >= 1");
    double scale = 1.0;
    for (int i = 0; i < n; ++i) scale *= lambda;
    return static_cast<double>(z_n) / scale;
}

}  // namespace treenet
