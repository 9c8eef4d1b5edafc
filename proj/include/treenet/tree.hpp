#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace treenet {

// One edge of an edge-rooted tree, identified with the node at its lower end.
struct TreeEdge {
    std::int32_t parent;  // -1 for the root edge
    std::int32_t level;   // 1 for the root edge
    double weight;        // X_e
    double resistance;    // lambda^(level-1) * X_e
};

// Explicit edge-rooted tree instance. Edges are stored in DFS pre-order with
// children left to right, so every parent index precedes its children and
// edge 0 is the root edge.
class SampledTree {
public:
    // Builds a tree from pre-order parent indices and weights; levels and
    // resistances are derived. Throws ValidationError on a malformed layout.
    // `arity` is the branching number of a regular tree, or 0 for a tree with
    // irregular branching.
    static SampledTree build(std::vector<std::int32_t> parents, std::vector<double> weights, double lambda,
                             int arity = 0);

    std::size_t size() const { return edges_.size(); }
    const TreeEdge& edge(std::size_t i) const { return edges_[i]; }
    const std::vector<TreeEdge>& edges() const { return edges_; }

    std::span<const std::int32_t> children(std::size_t i) const {
        return {children_.data() + child_offsets_[i], children_.data() + child_offsets_[i + 1]};
    }
    bool is_leaf(std::size_t i) const { return child_offsets_[i] == child_offsets_[i + 1]; }
    std::vector<std::int32_t> leaves() const;

    double lambda() const { return lambda_; }
    int edge_levels() const { return edge_levels_; }
    int arity() const { return arity_; }

    // Edge counts per level, index 0 holding level 1.
    std::vector<std::int64_t> level_counts() const;

    // Copy of this tree with edge i reweighted.
    SampledTree with_weight(std::size_t i, double weight) const;

private:
    SampledTree() = default;

    std::vector<TreeEdge> edges_;
    std::vector<std::int32_t> child_offsets_;
    std::vector<std::int32_t> children_;
    double lambda_ = 2.0;
    int edge_levels_ = 0;
    int arity_ = 0;
};

}  // namespace treenet
