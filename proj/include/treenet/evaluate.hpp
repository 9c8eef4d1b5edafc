#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treenet/model.hpp"
#include "treenet/rng.hpp"
#include "treenet/tree.hpp"

namespace treenet {

struct ResistanceSample {
    int n = 0;
    std::uint64_t replicate = 0;
    double resistance = 0.0;
    double conductance = 0.0;  // 1 / resistance
};

// Largest explicit tree, in edges.
inline constexpr std::int64_t kExplicitEdgeGuard = std::int64_t{1} << 25;

// Effective resistance between the root and the leaves of a depth-n regular
// tree, sampled edge by edge in DFS pre-order without materializing the tree.
// Consumes the stream exactly as sample_tree_explicit does.
ResistanceSample resistance_streaming(const TreeModel& model, int n, RngStream& rng);

// Explicit depth-n instance. Regular trees have n edge levels; Galton-Watson
// trees have the root edge plus generations 1..n (n + 1 edge levels). Each
// edge draws its weight on creation, then (GW only, above the last
// generation) its offspring count, then recurses into children.
SampledTree sample_tree_explicit(const TreeModel& model, int n, RngStream& rng,
                                 std::int64_t edge_guard = kExplicitEdgeGuard);

// Series-parallel fold with all leaves grounded together.
ResistanceSample resistance_of_tree(const SampledTree& tree);

// Per-edge resistance of the subtree hanging from each edge (the edge in
// series with the parallel combination of its children). Entry 0 is the
// effective resistance of the whole tree.
std::vector<double> subtree_resistances(const SampledTree& tree);

// Generation sizes Z_0..Z_n of a Galton-Watson process with Z_0 = 1.
std::vector<std::int64_t> gw_generations(const OffspringLaw& offspring, int n, RngStream& rng,
                                         std::int64_t population_guard = kExplicitEdgeGuard);

// Generation sizes Z_0..Z_n read off an explicit Galton-Watson tree.
std::vector<std::int64_t> tree_generations(const SampledTree& tree);

// sum_{i=0}^{n} lambda^i / Z_i: the resistance with every generation shorted
// to a single vertex, a lower bound on the exact resistance with unit weights.
double gw_shorted_resistance(std::span<const std::int64_t> generations, double lambda);

// Resistance of the tree with every edge level shorted to a single vertex:
// sum over levels of 1 / (sum of level conductances). Never exceeds the exact
// resistance; with unit weights it equals gw_shorted_resistance.
double level_shorted_resistance(const SampledTree& tree);

// Z_n / lambda^n.
double gw_w_estimate(std::int64_t z_n, double lambda, int n);

}  // namespace treenet
