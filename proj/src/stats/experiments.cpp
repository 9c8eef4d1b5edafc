#include <algorithm>
#include <cmath>
#include <limits>

#include "treenet/error.hpp"
#include "treenet/flows.hpp"
#include "treenet/oracle.hpp"
#include "treenet/parallel.hpp"
#include "treenet/stats.hpp"

namespace treenet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double nan_min(double acc, double x) { return std::isnan(acc) ? x : std::min(acc, x); }

}  // namespace

std::vector<ResistanceSample> run_replicates(const TreeModel& model, int n, std::int64_t m, std::uint64_t seed,
                                             int workers) {
    if (m < 1) throw ValidationError("replicate count must be >= 1");
    if (n < 1) throw ValidationError("depth n must be >= 1");
    std::vector<ResistanceSample> out(static_cast<std::size_t>(m));
    parallel_for(out.size(), workers, [&](std::size_t j) {
        RngStream rng(seed, j);
        if (model.is_regular()) {
            out[j] = resistance_streaming(model, n, rng);
        } else {
            out[j] = resistance_of_tree(sample_tree_explicit(model, n, rng));
        }
        out[j].n = n;
        out[j].replicate = j;
    });
    return out;
}

SweepResult run_sweep(const TreeModel& model, std::span<const int> depths,
                      const std::function<std::int64_t(int)>& reps_for, std::uint64_t seed, int workers) {
    SweepResult result;
    result.min_envelope_slack = kNaN;
    for (const int n : depths) {
        const auto samples = run_replicates(model, n, reps_for(n), depth_seed(seed, n), workers);
        for (const auto& s : samples) {
            if (const auto slack = envelope_slack(model, n, s.resistance)) {
                result.min_envelope_slack = nan_min(result.min_envelope_slack, *slack);
            }
        }
        result.reports.push_back(estimate_moments(samples));
    }
    return result;
}

GwExperiment gw_experiment(const TreeModel& model, int n, std::int64_t trees, std::uint64_t seed, int workers) {
    if (model.is_regular()) throw ValidationError("Galton-Watson experiment requires a gw: model");
    if (trees < 2) throw ValidationError("Galton-Watson experiment needs at least 2 trees");
    GwExperiment out;
    out.n = n;
    out.records.resize(static_cast<std::size_t>(trees));
    parallel_for(out.records.size(), workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        const SampledTree tree = sample_tree_explicit(model, n, rng);
        const auto z = tree_generations(tree);
        GwRecord& rec = out.records[i];
        rec.tree = static_cast<std::int64_t>(i);
        rec.b1 = static_cast<int>(z.size() > 1 ? z[1] : 0);
        rec.resistance = resistance_of_tree(tree).resistance;
        rec.shorted = level_shorted_resistance(tree);
        rec.shorted_unit = gw_shorted_resistance(z, model.lambda());
        rec.w_hat = gw_w_estimate(z.back(), model.lambda(), n);
        rec.n_conductance = n / rec.resistance;
    });

    std::vector<double> r_over_n, inv_w, product;
    std::map<int, std::vector<double>> by_b1;
    out.min_shorting_slack = std::numeric_limits<double>::infinity();
    for (const auto& rec : out.records) {
        r_over_n.push_back(rec.resistance / n);
        inv_w.push_back(1.0 / rec.w_hat);
        product.push_back(rec.resistance / n * rec.w_hat);
        by_b1[rec.b1].push_back(rec.n_conductance);
        out.min_shorting_slack = std::min(out.min_shorting_slack, rec.resistance - rec.shorted);
    }
    out.correlation_r_over_n_inv_w = pearson_correlation(r_over_n, inv_w);
    out.median_r_over_n_times_w = median(product);
    for (const auto& [b1, values] : by_b1) {
        ConditionalMean cm;
        cm.count = static_cast<std::int64_t>(values.size());
        double sum = 0.0;
        for (const double v : values) sum += v;
        cm.mean = sum / static_cast<double>(cm.count);
        if (cm.count > 1) {
            double ss = 0.0;
            for (const double v : values) ss += (v - cm.mean) * (v - cm.mean);
            cm.se = std::sqrt(ss / static_cast<double>(cm.count - 1) / static_cast<double>(cm.count));
        }
        out.n_conductance_by_b1[b1] = cm;
    }
    return out;
}

FlowExperiment flow_experiment(const TreeModel& model, int n, std::int64_t instances, int perturbations,
                               std::uint64_t seed, int workers) {
    if (instances < 2) throw ValidationError("flow experiment needs at least 2 instances");
    if (perturbations < 0) throw ValidationError("perturbation count must be >= 0");
    const double a = model.weights().lower();
    const double b = model.weights().upper();
    const bool binary = model.is_regular() && model.arity() == 2 && model.lambda() == 2.0;
    static constexpr double kEps[] = {1e-3, -1e-3, 1e-2, -1e-2};

    FlowExperiment out;
    out.records.resize(static_cast<std::size_t>(instances));
    parallel_for(out.records.size(), workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        const SampledTree tree = sample_tree_explicit(model, n, rng);
        const FlowSolution flow = solve_flow(tree);
        const FlowResiduals res = flow_residuals(tree, flow);

        FlowRecord& rec = out.records[i];
        rec.instance = static_cast<std::int64_t>(i);
        rec.n = n;
        rec.resistance = flow.resistance;
        rec.energy = flow.energy;
        rec.energy_gap = res.energy_gap;
        rec.max_node_law = res.node_law;
        rec.max_ohm = res.ohm;
        rec.unit_flux = res.unit_flux;
        rec.max_splitting = res.splitting;
        rec.envelope_slack = envelope_slack(model, n, flow.resistance).value_or(kNaN);

        const auto leaves = tree.leaves();
        rec.min_perturbation_slack = kNaN;
        if (leaves.size() >= 2) {
            const auto count = static_cast<std::uint64_t>(leaves.size());
            for (int p = 0; p < perturbations; ++p) {
                const std::uint64_t from = rng.below(count);
                std::uint64_t to = rng.below(count - 1);
                if (to >= from) ++to;
                const double eps = kEps[rng.below(4)];
                const FlowSolution moved = perturb_flow(tree, flow, leaves[from], leaves[to], eps);
                rec.min_perturbation_slack = nan_min(rec.min_perturbation_slack, moved.energy - flow.resistance);
            }
        }

        if (binary) {
            rec.min_current_margin = check_current_bounds(tree, flow, a, b).min_margin;
            const auto diag = concentration_diagnostics(tree, flow, a, b);
            rec.s4 = diag.s4;
            rec.s4_unscaled = diag.s4_unscaled;
            rec.b4 = diag.b4;
        } else {
            rec.min_current_margin = rec.s4 = rec.s4_unscaled = rec.b4 = kNaN;
        }
    });

    std::vector<double> r;
    double s4 = 0.0, s4u = 0.0;
    for (const auto& rec : out.records) {
        r.push_back(rec.resistance);
        s4 += rec.s4;
        s4u += rec.s4_unscaled;
    }
    out.resistance = summarize(r);
    out.mean_s4 = s4 / static_cast<double>(instances);
    out.mean_s4_unscaled = s4u / static_cast<double>(instances);
    out.efron_stein_bound = (b - a) * (b - a) * out.mean_s4;
    out.efron_stein_bound_unscaled = 0.5 * (b - a) * (b - a) * out.mean_s4_unscaled;
    return out;
}

std::vector<OracleRecord> oracle_experiment(const TreeModel& model, std::span<const int> depths,
                                            std::int64_t instances, std::uint64_t seed, int workers) {
    if (depths.empty()) throw ValidationError("oracle check needs at least one depth");
    if (instances < 1) throw ValidationError("oracle check needs at least one instance");
    std::vector<OracleRecord> out(static_cast<std::size_t>(instances));
    parallel_for(out.size(), workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        const int n = depths[i % depths.size()];
        const SampledTree tree = sample_tree_explicit(model, n, rng, static_cast<std::int64_t>(kOracleVertexGuard));
        const KirchhoffSolution oracle = kirchhoff_solve(tree);
        const FlowSolution flow = solve_flow(tree);
        const double r_fold = resistance_of_tree(tree).resistance;
        const OracleGaps gaps = oracle_compare(tree);

        OracleRecord& rec = out[i];
        rec.instance = static_cast<std::int64_t>(i);
        rec.n = n;
        rec.edges = static_cast<std::int64_t>(tree.size());
        rec.r_fold = r_fold;
        rec.r_flow = flow.resistance;
        rec.r_oracle = oracle.flow.resistance;
        rec.resistance_gap = gaps.resistance;
        rec.current_gap = gaps.current;
        rec.voltage_gap = gaps.voltage;
        rec.residual = oracle.residual;
        rec.diagonally_dominant = oracle.diagonally_dominant;
    });
    return out;
}

}  // namespace treenet
