#pragma once

#include <cstddef>
#include <vector>

#include "treenet/flows.hpp"
#include "treenet/tree.hpp"

namespace treenet {

// Largest tree (in vertices, sink included) the dense oracle accepts.
inline constexpr std::size_t kOracleVertexGuard = std::size_t{1} << 12;

// Node-law system for the unknown potentials: the root vertex plus the lower
// vertex of every non-leaf edge. All leaves are merged into one grounded sink
// and a unit current is injected at the root.
struct DenseSystem {
    std::size_t dim = 0;
    std::vector<double> matrix;  // row-major dim x dim weighted Laplacian restriction
    std::vector<double> rhs;
    std::vector<std::ptrdiff_t> unknown_of_edge;  // lower vertex of edge i, -1 for leaves (sink)

    double at(std::size_t r, std::size_t c) const { return matrix[r * dim + c]; }
    bool symmetric() const;
    // Every row weakly dominant and at least one row strictly dominant.
    bool diagonally_dominant() const;
};

DenseSystem assemble_kirchhoff(const SampledTree& tree);

// Gaussian elimination with partial pivoting; throws NumericalError when a
// pivot vanishes.
std::vector<double> solve_dense(DenseSystem system);

struct KirchhoffSolution {
    FlowSolution flow;      // currents from Ohm's law, total R = root potential
    double residual = 0.0;  // ||A U - rhs||_inf / ||rhs||_inf
    bool symmetric = false;
    bool diagonally_dominant = false;
};

KirchhoffSolution kirchhoff_solve(const SampledTree& tree);

struct OracleGaps {
    double resistance = 0.0;  // max relative gap of series-parallel and flow-solver R against the oracle
    double current = 0.0;     // max absolute edge-current gap
    double voltage = 0.0;     // max potential gap relative to R
    double residual = 0.0;    // oracle solve residual
};

OracleGaps oracle_compare(const SampledTree& tree);

}  // namespace treenet
