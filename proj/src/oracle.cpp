#include "treenet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "treenet/error.hpp"
#include "treenet/evaluate.hpp"

namespace treenet {

bool DenseSystem::symmetric() const {
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = r + 1; c < dim; ++c) {
            if (at(r, c) != at(c, r)) return false;
        }
    }
    return true;
}

bool DenseSystem::diagonally_dominant() const {
    bool strict_somewhere = false;
    for (std::size_t r = 0; r < dim; ++r) {
        double off = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            if (c != r) off += std::abs(at(r, c));
        }
        const double diag = at(r, r);
        const double slack = diag - off;
        if (slack < -1e-12 * diag) return false;
        if (slack > 1e-12 * diag) strict_somewhere = true;
    }
    return strict_somewhere;
}

DenseSystem assemble_kirchhoff(const SampledTree& tree) {
    const std::size_t vertices = tree.size() + 1;
    if (vertices > kOracleVertexGuard) {
        throw GuardError("Kirchhoff oracle limited to " + std::to_string(kOracleVertexGuard) + " vertices, tree has " +
                         std::to_string(vertices));
    }
    DenseSystem sys;
    sys.unknown_of_edge.assign(tree.size(), -1);
    sys.dim = 1;  // unknown 0 is the root vertex
    for (std::size_t i = 0; i < tree.size(); ++i) {
        if (!tree.is_leaf(i)) sys.unknown_of_edge[i] = static_cast<std::ptrdiff_t>(sys.dim++);
    }
    sys.matrix.assign(sys.dim * sys.dim, 0.0);
    sys.rhs.assign(sys.dim, 0.0);
    sys.rhs[0] = 1.0;

    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeEdge& e = tree.edge(i);
        const double g = 1.0 / e.resistance;
        const std::ptrdiff_t top = e.parent < 0 ? 0 : sys.unknown_of_edge[e.parent];
        const std::ptrdiff_t bottom = sys.unknown_of_edge[i];
        sys.matrix[top * sys.dim + top] += g;
        if (bottom >= 0) {
            sys.matrix[bottom * sys.dim + bottom] += g;
            sys.matrix[top * sys.dim + bottom] -= g;
            sys.matrix[bottom * sys.dim + top] -= g;
        }
    }
    return sys;
}

std::vector<double> solve_dense(DenseSystem sys) {
    const std::size_t n = sys.dim;
    auto& a = sys.matrix;
    auto& b = sys.rhs;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(a[r * n + k]) > std::abs(a[pivot * n + k])) pivot = r;
        }
        if (a[pivot * n + k] == 0.0) throw NumericalError("singular Kirchhoff system at column " + std::to_string(k));
        if (pivot != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[pivot * n + c]);
            std::swap(b[k], b[pivot]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = a[r * n + k] / a[k * n + k];
            if (factor == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a[r * n + c] -= factor * a[k * n + c];
            b[r] -= factor * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= a[k * n + c] * x[c];
        x[k] = s / a[k * n + k];
    }
    return x;
}

KirchhoffSolution kirchhoff_solve(const SampledTree& tree) {
    const DenseSystem sys = assemble_kirchhoff(tree);
    const std::vector<double> u = solve_dense(sys);

    KirchhoffSolution out;
    out.symmetric = sys.symmetric();
    out.diagonally_dominant = sys.diagonally_dominant();
    double rhs_norm = 0.0;
    for (std::size_t r = 0; r < sys.dim; ++r) {
        double s = -sys.rhs[r];
        for (std::size_t c = 0; c < sys.dim; ++c) s += sys.at(r, c) * u[c];
        out.residual = std::max(out.residual, std::abs(s));
        rhs_norm = std::max(rhs_norm, std::abs(sys.rhs[r]));
    }
    out.residual /= rhs_norm;

    FlowSolution& flow = out.flow;
    flow.resistance = u[0];
    flow.current.resize(tree.size());
    flow.voltage_top.resize(tree.size());
    flow.voltage_bottom.resize(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeEdge& e = tree.edge(i);
        const std::ptrdiff_t top = e.parent < 0 ? 0 : sys.unknown_of_edge[e.parent];
        const std::ptrdiff_t bottom = sys.unknown_of_edge[i];
        flow.voltage_top[i] = u[top];
        flow.voltage_bottom[i] = bottom >= 0 ? u[bottom] : 0.0;
        flow.current[i] = (flow.voltage_top[i] - flow.voltage_bottom[i]) / e.resistance;
        flow.energy += e.resistance * flow.current[i] * flow.current[i];
    }
    return out;
}

OracleGaps oracle_compare(const SampledTree& tree) {
    const KirchhoffSolution oracle = kirchhoff_solve(tree);
    const double r_oracle = oracle.flow.resistance;
    const double r_fold = resistance_of_tree(tree).resistance;
    const FlowSolution flow = solve_flow(tree);

    OracleGaps gaps;
    gaps.residual = oracle.residual;
    gaps.resistance = std::max(std::abs(r_fold - r_oracle), std::abs(flow.resistance - r_oracle)) / r_oracle;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        gaps.current = std::max(gaps.current, std::abs(flow.current[i] - oracle.flow.current[i]));
        gaps.voltage = std::max({gaps.voltage, std::abs(flow.voltage_top[i] - oracle.flow.voltage_top[i]),
                                 std::abs(flow.voltage_bottom[i] - oracle.flow.voltage_bottom[i])});
    }
    gaps.voltage /= r_oracle;
    return gaps;
}

}  // namespace treenet
