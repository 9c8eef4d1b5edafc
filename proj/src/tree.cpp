#include "treenet/tree.hpp"

#include <algorithm>
#include <string>

#include "treenet/error.hpp"
#include "treenet/model.hpp"

namespace treenet {

SampledTree SampledTree::build(std::vector<std::int32_t> parents, std::vector<double> weights, double lambda,
                               int arity) {
    if (parents.empty()) throw ValidationError("tree must have at least one edge");
    if (parents.size() != weights.size()) throw ValidationError("parents and weights differ in length");
    if (parents[0] != -1) throw ValidationError("edge 0 must be the root edge");

    SampledTree tree;
    tree.lambda_ = lambda;
    tree.arity_ = arity;
    tree.edges_.resize(parents.size());
    std::vector<std::int32_t> child_count(parents.size(), 0);
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const std::int32_t p = parents[i];
        if (i > 0 && (p < 0 || static_cast<std::size_t>(p) >= i)) {
            throw ValidationError("edge " + std::to_string(i) + " has parent " + std::to_string(p) +
                                  "; parents must precede children");
        }
        const std::int32_t level = p < 0 ? 1 : tree.edges_[p].level + 1;
        tree.edges_[i] = {p, level, weights[i], edge_resistance(level, weights[i], lambda)};
        if (p >= 0) ++child_count[p];
        tree.edge_levels_ = std::max(tree.edge_levels_, static_cast<int>(level));
    }

    tree.child_offsets_.assign(parents.size() + 1, 0);
    for (std::size_t i = 0; i < parents.size(); ++i) {
        tree.child_offsets_[i + 1] = tree.child_offsets_[i] + child_count[i];
    }
    tree.children_.resize(parents.size() - 1);
    std::vector<std::int32_t> cursor(tree.child_offsets_.begin(), tree.child_offsets_.end() - 1);
    for (std::size_t i = 1; i < parents.size(); ++i) {
        tree.children_[cursor[parents[i]]++] = static_cast<std::int32_t>(i);
    }

    // Pre-order: a child's subtree is contiguous and starts right after the
    // preceding sibling's subtree.
    std::vector<std::int32_t> subtree_end(parents.size());
    for (std::size_t i = parents.size(); i-- > 0;) {
        const auto kids = tree.children(i);
        std::int32_t expected = static_cast<std::int32_t>(i) + 1;
        for (const std::int32_t c : kids) {
            if (c != expected) throw ValidationError("edges are not in DFS pre-order");
            expected = subtree_end[c];
        }
        subtree_end[i] = expected;
    }

    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (tree.is_leaf(i) && tree.edges_[i].level != tree.edge_levels_) {
            throw ValidationError("leaf edge " + std::to_string(i) + " is not on the deepest level");
        }
        if (arity > 0 && !tree.is_leaf(i) && static_cast<int>(tree.children(i).size()) != arity) {
            throw ValidationError("regular tree node " + std::to_string(i) + " does not have " +
                                  std::to_string(arity) + " children");
        }
    }
    return tree;
}

std::vector<std::int32_t> SampledTree::leaves() const {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (is_leaf(i)) out.push_back(static_cast<std::int32_t>(i));
    }
    return out;
}

std::vector<std::int64_t> SampledTree::level_counts() const {
    std::vector<std::int64_t> counts(edge_levels_, 0);
    for (const auto& e : edges_) ++counts[e.level - 1];
    return counts;
}

SampledTree SampledTree::with_weight(std::size_t i, double weight) const {
    SampledTree copy = *this;
    TreeEdge& e = copy.edges_.at(i);
    e.weight = weight;
    e.resistance = edge_resistance(e.level, weight, lambda_);
    return copy;
}

}  // namespace treenet
