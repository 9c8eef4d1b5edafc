#pragma once

#include <cstdint>
#include <vector>

#include "treenet/tree.hpp"

namespace treenet {

// Unit flow from the root to the grounded leaves of an explicit tree.
// Currents are oriented rootward to leafward; edge i carries current[i].
struct FlowSolution {
    std::vector<double> current;
    std::vector<double> voltage_top;     // potential at the rootward end of each edge
    std::vector<double> voltage_bottom;  // potential at the leafward end (0 on leaves)
    std::vector<double> subtree_resistance;
    double resistance = 0.0;  // effective resistance of the tree
    double energy = 0.0;      // sum r_e current_e^2
    bool optimal = true;      // false after perturb_flow; voltages then belong to the optimal flow
};

// The energy-minimizing unit flow. An upward pass computes subtree
// resistances; a downward pass splits each edge's current among its children
// in proportion to their subtree conductances.
FlowSolution solve_flow(const SampledTree& tree);

double thomson_energy(const FlowSolution& flow, const SampledTree& tree);

// Moves eps units of current from the path to leaf_from onto the path to
// leaf_to, below their last common edge. The result is still a unit flow.
FlowSolution perturb_flow(const SampledTree& tree, const FlowSolution& flow, std::int32_t leaf_from,
                          std::int32_t leaf_to, double eps);

struct FlowResiduals {
    double node_law = 0.0;    // max |in - out| / |in| over internal nodes
    double ohm = 0.0;         // max |theta r - (U_top - U_bottom)| / U_top
    double unit_flux = 0.0;   // max of |root current - 1| and |sum leaf currents - 1|
    double energy_gap = 0.0;  // |energy - resistance| / resistance
    double splitting = 0.0;   // max relative deviation from conductance-proportional splitting
};

FlowResiduals flow_residuals(const SampledTree& tree, const FlowSolution& flow);

// b n / (a (n - level + 1) 2^(level-1)): deterministic cap on the optimal
// current through an edge of a binary tree with n edge levels.
double optimal_current_bound(int n, int level, double a, double b);

struct CurrentBoundEdge {
    double current;
    double bound;
    double margin;  // bound - current
};

struct CurrentBoundReport {
    std::vector<CurrentBoundEdge> edges;
    double min_margin = 0.0;
    std::size_t argmin = 0;
};

// Requires a regular binary tree with lambda = 2.
CurrentBoundReport check_current_bounds(const SampledTree& tree, const FlowSolution& flow, double a, double b);

struct ConcentrationDiagnostics {
    double s4 = 0.0;           // sum_e 2^(2 d(e)) theta(e)^4
    double s4_unscaled = 0.0;  // sum_e theta(e)^4
    double b4 = 0.0;           // (2^4 b^4 / a^4) sum_{i=1}^n (n/(n+1-i))^4 2^-i
    double v_minus_bound = 0.0;  // (b - a)^2 s4
};

// Requires a regular binary tree with lambda = 2.
ConcentrationDiagnostics concentration_diagnostics(const SampledTree& tree, const FlowSolution& flow, double a,
                                                   double b);

// sum_{i=1}^n (n/(n+1-i))^4 2^-i.
double tail_constant_sum(int n);

struct SubgaussianConstant {
    double constant = 0.0;  // C(a, b)
    double sup_sum = 0.0;   // sup_n tail_constant_sum(n)
    int argmax_n = 0;
};

// C(a, b) = (2^4 b^4 (b-a)^2 / a^4) sup_n tail_constant_sum(n); the supremum
// is taken over n <= 200 and the sequence is checked to be nonincreasing
// past its peak.
SubgaussianConstant subgaussian_constant(double a, double b);

}  // namespace treenet
