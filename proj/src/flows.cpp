#include "treenet/flows.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treenet/error.hpp"
#include "treenet/evaluate.hpp"

namespace treenet {

namespace {

void require_binary(const SampledTree& tree, const char* what) {
    if (tree.arity() != 2 || tree.lambda() != 2.0) {
        throw ValidationError(std::string(what) + " requires a regular binary tree with lambda = 2");
    }
}

double children_conductance(const SampledTree& tree, const std::vector<double>& subtree, std::size_t i) {
    double conductance = 0.0;
    for (const std::int32_t c : tree.children(i)) conductance += 1.0 / subtree[c];
    return conductance;
}

std::vector<std::int32_t> path_to_root(const SampledTree& tree, std::int32_t leaf) {
    std::vector<std::int32_t> path;
    for (std::int32_t e = leaf; e >= 0; e = tree.edge(e).parent) path.push_back(e);
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace

FlowSolution solve_flow(const SampledTree& tree) {
    FlowSolution flow;
    const std::size_t size = tree.size();
    flow.subtree_resistance = subtree_resistances(tree);
    flow.resistance = flow.subtree_resistance[0];
    flow.current.assign(size, 0.0);
    flow.voltage_top.assign(size, 0.0);
    flow.voltage_bottom.assign(size, 0.0);

    flow.current[0] = 1.0;
    flow.voltage_top[0] = flow.resistance;
    // Pre-order: parents are finalized before their children.
    for (std::size_t i = 0; i < size; ++i) {
        if (tree.is_leaf(i)) continue;
        const double conductance = children_conductance(tree, flow.subtree_resistance, i);
        flow.voltage_bottom[i] = flow.current[i] / conductance;
        for (const std::int32_t c : tree.children(i)) {
            flow.current[c] = flow.current[i] * ((1.0 / flow.subtree_resistance[c]) / conductance);
            flow.voltage_top[c] = flow.voltage_bottom[i];
        }
    }
    flow.energy = thomson_energy(flow, tree);
    return flow;
}

double thomson_energy(const FlowSolution& flow, const SampledTree& tree) {
    double energy = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        energy += tree.edge(i).resistance * flow.current[i] * flow.current[i];
    }
    return energy;
}

FlowSolution perturb_flow(const SampledTree& tree, const FlowSolution& flow, std::int32_t leaf_from,
                          std::int32_t leaf_to, double eps) {
    if (leaf_from == leaf_to) throw ValidationError("perturb_flow needs two distinct leaves");
    for (const std::int32_t leaf : {leaf_from, leaf_to}) {
        if (leaf < 0 || static_cast<std::size_t>(leaf) >= tree.size() || !tree.is_leaf(leaf)) {
            throw ValidationError("perturb_flow: edge " + std::to_string(leaf) + " is not a leaf");
        }
    }
    const auto from = path_to_root(tree, leaf_from);
    const auto to = path_to_root(tree, leaf_to);
    std::size_t shared = 0;
    while (shared < from.size() && shared < to.size() && from[shared] == to[shared]) ++shared;

    FlowSolution out = flow;
    for (std::size_t k = shared; k < from.size(); ++k) out.current[from[k]] -= eps;
    for (std::size_t k = shared; k < to.size(); ++k) out.current[to[k]] += eps;
    out.energy = thomson_energy(out, tree);
    out.optimal = false;
    return out;
}

FlowResiduals flow_residuals(const SampledTree& tree, const FlowSolution& flow) {
    FlowResiduals res;
    double leaf_sum = 0.0;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const double theta = flow.current[i];
        const double drop = flow.voltage_top[i] - flow.voltage_bottom[i];
        res.ohm = std::max(res.ohm, std::abs(theta * tree.edge(i).resistance - drop) / flow.voltage_top[i]);
        if (tree.is_leaf(i)) {
            leaf_sum += theta;
            continue;
        }
        double out = 0.0;
        for (const std::int32_t c : tree.children(i)) out += flow.current[c];
        res.node_law = std::max(res.node_law, std::abs(theta - out) / std::abs(theta));

        const double conductance = children_conductance(tree, flow.subtree_resistance, i);
        for (const std::int32_t c : tree.children(i)) {
            const double expected = theta * (1.0 / flow.subtree_resistance[c]) / conductance;
            res.splitting = std::max(res.splitting, std::abs(flow.current[c] - expected) / expected);
        }
    }
    res.unit_flux = std::max(std::abs(flow.current[0] - 1.0), std::abs(leaf_sum - 1.0));
    res.energy_gap = std::abs(flow.energy - flow.resistance) / flow.resistance;
    return res;
}

double optimal_current_bound(int n, int level, double a, double b) {
    return b * n / (a * (n - level + 1) * std::ldexp(1.0, level - 1));
}

CurrentBoundReport check_current_bounds(const SampledTree& tree, const FlowSolution& flow, double a, double b) {
    require_binary(tree, "the optimal-current bound");
    CurrentBoundReport report;
    report.edges.reserve(tree.size());
    const int n = tree.edge_levels();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const double bound = optimal_current_bound(n, tree.edge(i).level, a, b);
        const double margin = bound - flow.current[i];
        report.edges.push_back({flow.current[i], bound, margin});
        if (i == 0 || margin < report.min_margin) {
            report.min_margin = margin;
            report.argmin = i;
        }
    }
    return report;
}

double tail_constant_sum(int n) {
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double ratio = static_cast<double>(n) / (n + 1 - i);
        sum += std::pow(ratio, 4) * std::ldexp(1.0, -i);
    }
    return sum;
}

ConcentrationDiagnostics concentration_diagnostics(const SampledTree& tree, const FlowSolution& flow, double a,
                                                   double b) {
    require_binary(tree, "concentration diagnostics");
    ConcentrationDiagnostics d;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const double theta2 = flow.current[i] * flow.current[i];
        d.s4 += std::ldexp(1.0, 2 * tree.edge(i).level) * theta2 * theta2;
        d.s4_unscaled += theta2 * theta2;
    }
    d.b4 = 16.0 * std::pow(b / a, 4) * tail_constant_sum(tree.edge_levels());
    d.v_minus_bound = (b - a) * (b - a) * d.s4;
    return d;
}

SubgaussianConstant subgaussian_constant(double a, double b) {
    if (!(a > 0.0) || a > b) throw ValidationError("subgaussian_constant requires 0 < a <= b");
    constexpr int kMaxDepth = 200;
    std::vector<double> sums(kMaxDepth + 1, 0.0);
    SubgaussianConstant out;
    for (int n = 1; n <= kMaxDepth; ++n) {
        sums[n] = tail_constant_sum(n);
        if (sums[n] > out.sup_sum) {
            out.sup_sum = sums[n];
            out.argmax_n = n;
        }
    }
    for (int n = out.argmax_n; n < kMaxDepth; ++n) {
        if (sums[n + 1] > sums[n]) {
            throw NumericalError("tail constant sum is not decreasing past its peak at n=" + std::to_string(n));
        }
    }
    out.constant = 16.0 * std::pow(b, 4) * (b - a) * (b - a) / std::pow(a, 4) * out.sup_sum;
    return out;
}

}  // namespace treenet
