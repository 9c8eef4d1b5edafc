#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "output.hpp"
#include "treenet/cli.hpp"
#include "treenet/error.hpp"
#include "treenet/evaluate.hpp"
#include "treenet/flows.hpp"
#include "treenet/oracle.hpp"
#include "treenet/parallel.hpp"
#include "treenet/stats.hpp"

namespace treenet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCommands[] = {"sample", "sweep", "fit", "flows", "oracle-check", "rde", "gw", "constants"};

struct Context {
    std::string command;
    ExperimentConfig config;
    fs::path out_dir;
    json provenance;
    std::string provenance_line;
    std::ostream& out;

    fs::path path(const std::string& name, const char* csv_ext = ".csv") const {
        return out_dir / (name + (config.format == "json" ? std::string(".json") : std::string(csv_ext)));
    }

    void write(const std::string& name, const Table& table, const json& extra = json::object()) const {
        if (config.format == "json") {
            write_table_json(path(name), provenance, table, extra);
        } else {
            write_csv(path(name), provenance_line, table);
        }
    }
};

WeightDistribution config_weights(const ExperimentConfig& c) { return WeightDistribution::parse(c.dist); }

TreeModel config_model(const ExperimentConfig& c) { return TreeModel::parse(c.model, config_weights(c), c.lambda); }

int single_depth(const Context& ctx) {
    if (ctx.config.n.size() != 1) {
        throw ValidationError("n: '" + ctx.command + "' takes exactly one depth, got " +
                              std::to_string(ctx.config.n.size()));
    }
    return ctx.config.n.front();
}

json moments_json(const SampleMoments& m) {
    json q = json::array();
    for (std::size_t i = 0; i < m.quantiles.size(); ++i) q.push_back({kReportedQuantiles[i], number(m.quantiles[i])});
    return {{"count", m.count},    {"mean", number(m.mean)},       {"variance", number(m.variance)},
            {"m2", number(m.m2)},  {"m3", number(m.m3)},           {"m4", number(m.m4)},
            {"se_mean", number(m.se_mean)}, {"se_variance", number(m.se_variance)}, {"quantiles", q}};
}

std::optional<double> tail_constant_for(const TreeModel& model) {
    if (!model.is_regular() || model.arity() != 2 || model.lambda() != 2.0) return std::nullopt;
    return subgaussian_constant(model.weights().lower(), model.weights().upper()).constant;
}

// --------------------------------------------------------------------------

void cmd_sample(const Context& ctx) {
    const auto& c = ctx.config;
    const TreeModel model = config_model(c);
    const auto constant = tail_constant_for(model);
    const std::vector<double> grid = c.t_grid.empty() ? default_tail_grid() : c.t_grid;

    std::vector<ResistanceSample> all;
    std::vector<std::pair<int, TailReport>> tails;
    for (const int n : c.n) {
        auto samples = run_replicates(model, n, c.reps.for_n(n), depth_seed(c.seed, n), c.workers);
        if (samples.size() >= 100) {
            std::vector<double> r;
            for (const auto& s : samples) r.push_back(s.resistance);
            tails.emplace_back(n, tail_profile(r, grid, constant, n));
        }
        all.insert(all.end(), samples.begin(), samples.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.replicate < y.replicate; });

    Table table{{"replicate", "n", "R", "C"}, {}};
    for (const auto& s : all) {
        table.rows.push_back({static_cast<std::int64_t>(s.replicate), std::int64_t{s.n}, s.resistance, s.conductance});
    }
    ctx.write("samples", table);

    for (const auto& [n, report] : tails) {
        Table t{{"t", "count", "freq", "wilson_lo", "wilson_hi", "bound"}, {}};
        for (const auto& row : report.rows) {
            t.rows.push_back({row.t, row.count, row.freq, row.wilson_lo, row.wilson_hi,
                              row.bound.value_or(std::numeric_limits<double>::quiet_NaN())});
        }
        const json extra = {{"n", n}, {"m", report.m}, {"mean", number(report.mean)},
                            {"constant", report.constant ? number(*report.constant) : json(nullptr)}};
        ctx.write(c.n.size() == 1 ? "tails" : "tails_n" + std::to_string(n), t, extra);
    }
    ctx.out << "sample: wrote " << all.size() << " replicates to " << ctx.out_dir.string() << '\n';
}

void cmd_sweep(const Context& ctx) {
    const auto& c = ctx.config;
    const TreeModel model = config_model(c);
    const SweepResult sweep = run_sweep(model, c.n, [&](int n) { return c.reps.for_n(n); }, c.seed, c.workers);

    Table table{{"n", "m", "mean_R", "se_R", "var_R", "se_var_R", "mean_C", "var_C", "se_var_C"}, {}};
    json reports = json::array();
    for (const auto& r : sweep.reports) {
        table.rows.push_back({std::int64_t{r.n}, r.m, r.resistance.mean, r.resistance.se_mean, r.resistance.variance,
                              r.resistance.se_variance, r.conductance.mean, r.conductance.variance,
                              r.conductance.se_variance});
        reports.push_back({{"n", r.n},
                           {"m", r.m},
                           {"resistance", moments_json(r.resistance)},
                           {"conductance", moments_json(r.conductance)}});
    }
    ctx.write("sweep", table, {{"reports", reports}, {"min_envelope_slack", number(sweep.min_envelope_slack)}});
    ctx.out << "sweep: " << sweep.reports.size() << " depths, min envelope slack "
            << format_double(sweep.min_envelope_slack) << '\n';
}

struct SweepRow {
    double n, mean_r, se_r, var_c, se_var_c;
};

std::vector<SweepRow> read_sweep(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("input: cannot read sweep file '" + path.string() + "'");
    std::vector<SweepRow> rows;
    const auto to_double = [&](const std::string& s) {
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        try {
            return std::stod(s);
        } catch (const std::exception&) {
            throw ValidationError("input: malformed number '" + s + "' in '" + path.string() + "'");
        }
    };

    if (path.extension() == ".json") {
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError("input: '" + path.string() + "' is not valid JSON: " + e.what());
        }
        const auto value = [](const json& row, const char* key) {
            const json& v = row.at(key);
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        try {
            for (const auto& row : doc.at("rows")) {
                rows.push_back({value(row, "n"), value(row, "mean_R"), value(row, "se_R"), value(row, "var_C"),
                                value(row, "se_var_C")});
            }
        } catch (const json::exception& e) {
            throw ValidationError("input: '" + path.string() + "' lacks sweep columns: " + e.what());
        }
        return rows;
    }

    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (header.empty()) {
            header = fields;
            continue;
        }
        const auto col = [&](const char* name) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) throw ValidationError(std::string("input: sweep file lacks column ") + name);
            const auto idx = static_cast<std::size_t>(it - header.begin());
            if (idx >= fields.size()) throw ValidationError("input: short row in '" + path.string() + "'");
            return to_double(fields[idx]);
        };
        rows.push_back({col("n"), col("mean_R"), col("se_R"), col("var_C"), col("se_var_C")});
    }
    return rows;
}

void cmd_fit(const Context& ctx) {
    const auto& c = ctx.config;
    if (c.input.empty()) throw ValidationError("input: fit needs --input <sweep.csv|sweep.json>");
    const auto rows = read_sweep(c.input);
    const WeightMoments wm = config_weights(c).moments();

    std::vector<FitPoint> mean_grid, var_grid;
    for (const auto& r : rows) {
        mean_grid.push_back({r.n, r.mean_r, r.se_r});
        var_grid.push_back({r.n, r.var_c, r.se_var_c});
    }
    const FitReport fit = fit_expectation(mean_grid, wm.mean, wm.variance, c.band_min, c.band_max);

    json residuals = json::array();
    for (const auto& r : fit.residuals) {
        residuals.push_back({{"n", r.n},
                             {"mean", number(r.value)},
                             {"se", number(r.se)},
                             {"fitted", number(r.fitted)},
                             {"residual", number(r.residual)},
                             {"constrained_residual", number(r.constrained_residual)}});
    }
    json doc = {{"provenance", ctx.provenance},
                {"model", "alpha*n + beta*ln(n) + gamma"},
                {"coefficients", {{"alpha", fit.alpha}, {"beta", fit.beta}, {"gamma", fit.gamma}}},
                {"standard_errors", {{"alpha", fit.se_alpha}, {"beta", fit.se_beta}, {"gamma", fit.se_gamma}}},
                {"targets", {{"alpha", fit.target_alpha}, {"beta", fit.target_beta}}},
                {"chi2", fit.chi2},
                {"residuals", residuals},
                {"constrained_residual_band",
                 {{"n_min", fit.band_n_min},
                  {"n_max", fit.band_n_max},
                  {"min", fit.band_min},
                  {"max", fit.band_max},
                  {"range", fit.band_range()}}}};
    try {
        const SlopeFit slope = fit_variance_slope(var_grid);
        doc["variance_slope"] = {{"slope", slope.slope}, {"intercept", slope.intercept}};
    } catch (const ValidationError& e) {
        doc["variance_slope"] = {{"error", e.what()}};
    }
    write_json(ctx.out_dir / "fit.json", doc);
    ctx.out << "fit: alpha=" << format_double(fit.alpha) << " beta=" << format_double(fit.beta)
            << " gamma=" << format_double(fit.gamma) << " band range=" << format_double(fit.band_range()) << '\n';
}

void cmd_flows(const Context& ctx) {
    const auto& c = ctx.config;
    const TreeModel model = config_model(c);
    const int n = single_depth(ctx);
    const FlowExperiment exp = flow_experiment(model, n, c.instances, c.perturbations, c.seed, c.workers);

    Table table{{"instance", "n", "R", "energy", "energy_rel_gap", "max_node_law", "max_ohm", "unit_flux_error",
                 "max_splitting", "min_perturbation_slack", "current_bound_min_margin", "S4", "S4_unscaled", "B4",
                 "envelope_slack"},
                {}};
    double max_gap = 0.0, min_pert = INFINITY, min_margin = INFINITY, min_b4_gap = INFINITY, min_env = INFINITY;
    double max_node = 0.0, max_ohm = 0.0, max_flux = 0.0, max_split = 0.0;
    for (const auto& r : exp.records) {
        table.rows.push_back({r.instance, std::int64_t{r.n}, r.resistance, r.energy, r.energy_gap, r.max_node_law,
                              r.max_ohm, r.unit_flux, r.max_splitting, r.min_perturbation_slack,
                              r.min_current_margin, r.s4, r.s4_unscaled, r.b4, r.envelope_slack});
        max_gap = std::max(max_gap, r.energy_gap);
        max_node = std::max(max_node, r.max_node_law);
        max_ohm = std::max(max_ohm, r.max_ohm);
        max_flux = std::max(max_flux, r.unit_flux);
        max_split = std::max(max_split, r.max_splitting);
        if (!std::isnan(r.min_perturbation_slack)) min_pert = std::min(min_pert, r.min_perturbation_slack);
        if (!std::isnan(r.min_current_margin)) min_margin = std::min(min_margin, r.min_current_margin);
        if (!std::isnan(r.s4)) min_b4_gap = std::min(min_b4_gap, r.b4 - r.s4);
        if (!std::isnan(r.envelope_slack)) min_env = std::min(min_env, r.envelope_slack);
    }
    ctx.write("flows", table);

    // Per-edge dump of one instance, regenerated from its stream.
    if (c.dump_instance < 0 || c.dump_instance >= c.instances) {
        throw ValidationError("dump_instance must lie in [0, instances)");
    }
    RngStream rng(c.seed, static_cast<std::uint64_t>(c.dump_instance));
    const SampledTree tree = sample_tree_explicit(model, n, rng);
    const FlowSolution flow = solve_flow(tree);
    const bool binary = tree.arity() == 2 && tree.lambda() == 2.0;
    Table dump{{"edge_id", "parent_id", "level", "X", "r", "theta", "voltage_top", "voltage_bottom", "lemma6_bound",
                "margin"},
               {}};
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const TreeEdge& e = tree.edge(i);
        const double bound = binary ? optimal_current_bound(tree.edge_levels(), e.level, model.weights().lower(),
                                                            model.weights().upper())
                                    : std::numeric_limits<double>::quiet_NaN();
        dump.rows.push_back({static_cast<std::int64_t>(i), std::int64_t{e.parent}, std::int64_t{e.level}, e.weight,
                             e.resistance, flow.current[i], flow.voltage_top[i], flow.voltage_bottom[i], bound,
                             bound - flow.current[i]});
    }
    ctx.write("flow_dump", dump, {{"instance", c.dump_instance}});

    const double b_minus_a = model.weights().upper() - model.weights().lower();
    json summary = {{"provenance", ctx.provenance},
                    {"n", n},
                    {"instances", c.instances},
                    {"perturbations", c.perturbations},
                    {"resistance", moments_json(exp.resistance)},
                    {"max_energy_rel_gap", max_gap},
                    {"max_node_law_residual", max_node},
                    {"max_ohm_residual", max_ohm},
                    {"max_unit_flux_error", max_flux},
                    {"max_splitting_deviation", max_split},
                    {"min_perturbation_slack", number(min_pert)},
                    {"min_current_bound_margin", number(min_margin)},
                    {"min_B4_minus_S4", number(min_b4_gap)},
                    {"min_envelope_slack", number(min_env)},
                    {"mean_S4", number(exp.mean_s4)},
                    {"mean_S4_unscaled", number(exp.mean_s4_unscaled)},
                    {"efron_stein",
                     {{"variance_R", number(exp.resistance.variance)},
                      {"se_variance_R", number(exp.resistance.se_variance)},
                      {"bound_scaled", number(exp.efron_stein_bound)},
                      {"bound_unscaled", number(exp.efron_stein_bound_unscaled)},
                      {"b_minus_a", b_minus_a}}}};
    write_json(ctx.out_dir / "flows_summary.json", summary);
    ctx.out << "flows: " << c.instances << " instances, max energy gap " << format_double(max_gap)
            << ", min perturbation slack " << format_double(min_pert) << '\n';
}

void cmd_oracle(const Context& ctx) {
    const auto& c = ctx.config;
    const TreeModel model = config_model(c);
    const auto records = oracle_experiment(model, c.n, c.instances, c.seed, c.workers);
    Table table{{"instance", "n", "edges", "R_series_parallel", "R_flow", "R_oracle", "resistance_gap",
                 "current_gap", "voltage_gap", "residual", "diagonally_dominant"},
                {}};
    double max_r = 0.0, max_i = 0.0, max_v = 0.0, max_res = 0.0;
    std::int64_t dominant = 0;
    for (const auto& r : records) {
        table.rows.push_back({r.instance, std::int64_t{r.n}, r.edges, r.r_fold, r.r_flow, r.r_oracle,
                              r.resistance_gap, r.current_gap, r.voltage_gap, r.residual,
                              std::int64_t{r.diagonally_dominant ? 1 : 0}});
        max_r = std::max(max_r, r.resistance_gap);
        max_i = std::max(max_i, r.current_gap);
        max_v = std::max(max_v, r.voltage_gap);
        max_res = std::max(max_res, r.residual);
        dominant += r.diagonally_dominant ? 1 : 0;
    }
    ctx.write("oracle", table);
    write_json(ctx.out_dir / "oracle_summary.json",
               {{"provenance", ctx.provenance},
                {"instances", records.size()},
                {"max_resistance_gap", max_r},
                {"max_current_gap", max_i},
                {"max_voltage_gap", max_v},
                {"max_residual", max_res},
                {"diagonally_dominant", dominant}});
    ctx.out << "oracle-check: " << records.size() << " instances, max relative resistance gap "
            << format_double(max_r) << '\n';
}

void cmd_rde(const Context& ctx) {
    const auto& c = ctx.config;
    const WeightDistribution weights = config_weights(c);
    const int max_level = *std::max_element(c.n.begin(), c.n.end());
    const double a = weights.lower(), b = weights.upper();

    // The within-pool SE ignores the resampling noise inherited from earlier
    // levels, so the pool-mean SE comes from independent pools of the same size.
    const auto replicates = static_cast<std::size_t>(c.pool_replicates);
    std::vector<std::vector<double>> replicate_means(replicates);
    parallel_for(replicates, c.workers, [&](std::size_t r) {
        rde_iterate(weights, c.pool, max_level, mix_seed(c.seed, r + 1), [&](const RdePool& pool) {
            double sum = 0.0;
            for (const double v : pool.values) sum += v;
            replicate_means[r].push_back(sum / static_cast<double>(pool.values.size()));
        });
    });

    Table table{{"level", "m", "mean_C", "se_C", "se_C_replicates", "var_C", "se_var_C", "min_C", "max_C",
                 "envelope_slack"},
                {}};
    rde_iterate(weights, c.pool, max_level, c.seed, [&](const RdePool& pool) {
        const SampleMoments m = summarize(pool.values);
        const double level = pool.level;
        const double slack = std::min(level * m.min() - 1.0 / b, 1.0 / a - level * m.max());
        double se_replicates = std::numeric_limits<double>::quiet_NaN();
        if (replicates >= 2) {
            std::vector<double> means;
            for (const auto& r : replicate_means) means.push_back(r[static_cast<std::size_t>(pool.level - 1)]);
            se_replicates = std::sqrt(summarize(means).variance);
        }
        table.rows.push_back({std::int64_t{pool.level}, m.count, m.mean, m.se_mean, se_replicates, m.variance,
                              m.se_variance, m.min(), m.max(), slack});
    });
    ctx.write("rde", table);
    ctx.out << "rde: iterated pool of " << c.pool << " to level " << max_level << '\n';
}

void cmd_gw(const Context& ctx) {
    const auto& c = ctx.config;
    const TreeModel model = config_model(c);
    const int n = single_depth(ctx);
    const GwExperiment exp = gw_experiment(model, n, c.instances, c.seed, c.workers);
    Table table{{"tree", "B1", "R", "shorted", "W_hat", "nC"}, {}};
    for (const auto& r : exp.records) {
        table.rows.push_back({r.tree, std::int64_t{r.b1}, r.resistance, r.shorted, r.w_hat, r.n_conductance});
    }
    ctx.write("gw", table);

    json by_b1 = json::array();
    for (const auto& [b1, cm] : exp.n_conductance_by_b1) {
        by_b1.push_back({{"B1", b1}, {"count", cm.count}, {"mean_nC", number(cm.mean)}, {"se", number(cm.se)}});
    }
    json summary = {{"provenance", ctx.provenance},
                    {"n", n},
                    {"trees", c.instances},
                    {"lambda", model.lambda()},
                    {"correlation_R_over_n_vs_inverse_W", number(exp.correlation_r_over_n_inv_w)},
                    {"median_R_over_n_times_W", number(exp.median_r_over_n_times_w)},
                    {"median_abs_deviation_from_one", number(std::abs(exp.median_r_over_n_times_w - 1.0))},
                    {"min_shorting_slack", number(exp.min_shorting_slack)},
                    {"nC_by_B1", by_b1}};
    const auto one = exp.n_conductance_by_b1.find(1), two = exp.n_conductance_by_b1.find(2);
    if (one != exp.n_conductance_by_b1.end() && two != exp.n_conductance_by_b1.end()) {
        const double lo = std::min(one->second.mean, two->second.mean);
        summary["nC_relative_difference_B1_1_vs_2"] = number(std::abs(two->second.mean - one->second.mean) / lo);
    }
    write_json(ctx.out_dir / "gw_summary.json", summary);
    ctx.out << "gw: " << c.instances << " trees, corr(R/n, 1/W) = " << format_double(exp.correlation_r_over_n_inv_w)
            << '\n';
}

void cmd_constants(const Context& ctx) {
    const auto& c = ctx.config;
    const WeightDistribution weights = config_weights(c);
    const double a = c.a.value_or(weights.lower());
    const double b = c.b.value_or(weights.upper());
    const double var_c1 = weights.moments().reciprocal_variance;
    const SubgaussianConstant tail = subgaussian_constant(a, b);

    Table table{{"n", "K0", "var_C1", "K1", "K", "variance_bound", "tail_sum"}, {}};
    for (const int n : c.n) {
        const auto bound = conductance_variance_bound(a, b, var_c1, n);
        table.rows.push_back({std::int64_t{n}, bound.k0, var_c1, bound.k1, bound.k, bound.bound, tail_constant_sum(n)});
    }
    ctx.write("constants", table);
    const auto k = conductance_variance_bound(a, b, var_c1, 1);
    write_json(ctx.out_dir / "constants_summary.json", {{"provenance", ctx.provenance},
                                                        {"a", a},
                                                        {"b", b},
                                                        {"K0", k.k0},
                                                        {"var_C1", var_c1},
                                                        {"K1", k.k1},
                                                        {"K", k.k},
                                                        {"variance_bound_numerator", 1024.0 * k.k},
                                                        {"subgaussian_constant", tail.constant},
                                                        {"sup_tail_sum", tail.sup_sum},
                                                        {"sup_tail_sum_n", tail.argmax_n}});
    ctx.out << "constants: K=" << format_double(k.k) << " bound=" << format_double(1024.0 * k.k)
            << "/n^4 C=" << format_double(tail.constant) << '\n';
}

// --------------------------------------------------------------------------

struct Flags {
    std::string config, model, lambda, dist, n, reps, seed, out, workers, format, t_grid, pool, pool_replicates, instances,
        perturbations, input, a, b, band_min, band_max, dump_instance;
};

template <class T>
T flag_number(const std::string& text, const char* field) {
    try {
        std::size_t used = 0;
        T value{};
        if constexpr (std::is_same_v<T, double>) {
            value = std::stod(text, &used);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
            value = std::stoull(text, &used);
        } else {
            value = static_cast<T>(std::stoll(text, &used));
        }
        if (used != text.size()) throw std::invalid_argument("trailing");
        return value;
    } catch (const std::exception&) {
        throw ValidationError(std::string("malformed value '") + text + "' for --" + field);
    }
}

void apply_flags(ExperimentConfig& c, const Flags& f, const CLI::App& app) {
    const auto given = [&](const char* name) { return app.count(std::string("--") + name) > 0; };
    if (given("model")) c.model = f.model;
    if (given("lambda")) c.lambda = flag_number<double>(f.lambda, "lambda");
    if (given("dist")) c.dist = f.dist;
    if (given("n")) c.n = parse_depths(f.n);
    if (given("reps")) c.reps = RepsSpec::parse(f.reps);
    if (given("seed")) c.seed = flag_number<std::uint64_t>(f.seed, "seed");
    if (given("out")) c.out_dir = f.out;
    if (given("workers")) c.workers = flag_number<int>(f.workers, "workers");
    if (given("format")) c.format = f.format;
    if (given("t-grid")) c.t_grid = parse_grid(f.t_grid);
    if (given("pool")) c.pool = flag_number<std::int64_t>(f.pool, "pool");
    if (given("pool-replicates")) c.pool_replicates = flag_number<int>(f.pool_replicates, "pool-replicates");
    if (given("instances")) c.instances = flag_number<std::int64_t>(f.instances, "instances");
    if (given("perturbations")) c.perturbations = flag_number<int>(f.perturbations, "perturbations");
    if (given("input")) c.input = f.input;
    if (given("a")) c.a = flag_number<double>(f.a, "a");
    if (given("b")) c.b = flag_number<double>(f.b, "b");
    if (given("band-min")) c.band_min = flag_number<double>(f.band_min, "band-min");
    if (given("band-max")) c.band_max = flag_number<double>(f.band_max, "band-max");
    if (given("dump-instance")) c.dump_instance = flag_number<std::int64_t>(f.dump_instance, "dump-instance");
}

void resolve_defaults(const std::string& command, ExperimentConfig& c) {
    if (c.out_dir.empty()) {
        const char* env = std::getenv("TREENET_OUT_DIR");
        c.out_dir = env && *env ? env : ".";
    }
    if (c.n.empty()) {
        if (command == "oracle-check") {
            c.n = parse_depths("2..9");
        } else if (command == "constants") {
            c.n = parse_depths("1..20");
        } else if (command == "rde") {
            c.n = {12};
        } else {
            c.n = {10};
        }
    }
    if (c.workers < 1) throw ValidationError("workers must be >= 1");
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json, got '" + c.format + "'");
    if (c.pool < 2) throw ValidationError("pool must be >= 2");
    if (c.pool_replicates < 0 || c.pool_replicates == 1) throw ValidationError("pool_replicates must be 0 or >= 2");
    if (c.instances < 1) throw ValidationError("instances must be >= 1");
    if (c.perturbations < 0) throw ValidationError("perturbations must be >= 0");
    for (const int n : c.n) {
        if (n < 1) throw ValidationError("n values must be >= 1");
    }
    // Validate the literals up front so a bad value fails before any work.
    const WeightDistribution weights = WeightDistribution::parse(c.dist);
    if (command != "rde" && command != "constants" && command != "fit") TreeModel::parse(c.model, weights, c.lambda);
}

json provenance_of(const std::string& command, const ExperimentConfig& c) {
    // Execution-only settings are left out so that runs differing only in
    // worker count or output location produce identical files.
    json cfg = json::parse(emit_config(c));
    cfg.erase("workers");
    cfg.erase("out_dir");
    return {{"tool", "treenet"}, {"command", command}, {"config", cfg}};
}

void print_usage(std::ostream& os) {
    os << "usage: treenet <command> [options]\n"
          "commands: sample sweep fit flows oracle-check rde gw constants\n"
          "run 'treenet <command> --help' for options\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        print_usage(args.empty() ? err : out);
        return args.empty() ? kExitValidation : kExitOk;
    }
    const std::string command = args[0];
    if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands)) {
        err << "error: unknown subcommand '" << command << "'\n";
        print_usage(err);
        return kExitValidation;
    }

    CLI::App app{"treenet " + command, "treenet " + command};
    Flags f;
    app.add_option("--config", f.config, "JSON config file; flags override its values");
    app.add_option("--model", f.model, "reg:<arity> or gw:<k1:p1,k2:p2,...>");
    app.add_option("--lambda", f.lambda, "scaling base (default: arity or E B)");
    app.add_option("--dist", f.dist, "const:v | unif:a,b | twopoint:a,b[,p] | disc:v1:p1,...");
    app.add_option("--n", f.n, "depths, e.g. 10, 2..18, 4,6,8");
    app.add_option("--reps", f.reps, "replicates: m or m,lo..hi:m2,...");
    app.add_option("--seed", f.seed, "master seed");
    app.add_option("--out", f.out, "output directory (default $TREENET_OUT_DIR or .)");
    app.add_option("--workers", f.workers, "worker threads; never changes output");
    app.add_option("--format", f.format, "csv or json");
    app.add_option("--t-grid", f.t_grid, "tail thresholds, comma separated");
    app.add_option("--pool", f.pool, "population-dynamics pool size");
    app.add_option("--pool-replicates", f.pool_replicates, "independent pools used for the pool-mean SE");
    app.add_option("--instances", f.instances, "instances / trees");
    app.add_option("--perturbations", f.perturbations, "flow perturbations per instance");
    app.add_option("--input", f.input, "sweep file for fit");
    app.add_option("--a", f.a, "support lower bound override");
    app.add_option("--b", f.b, "support upper bound override");
    app.add_option("--band-min", f.band_min, "smallest n in the constrained-residual band");
    app.add_option("--band-max", f.band_max, "largest n in the constrained-residual band");
    app.add_option("--dump-instance", f.dump_instance, "instance written to flow_dump");

    try {
        std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        ExperimentConfig config;
        if (app.count("--config") > 0) {
            std::ifstream in(f.config);
            if (!in) throw ValidationError("config: cannot read '" + f.config + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            config = parse_config(buf.str());
        }
        apply_flags(config, f, app);
        resolve_defaults(command, config);

        const fs::path out_dir = config.out_dir;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir)) {
            throw ValidationError("out: cannot create output directory '" + out_dir.string() + "'");
        }

        const json provenance = provenance_of(command, config);
        Context ctx{command, config, out_dir, provenance, provenance.dump(), out};
        if (command == "sample") cmd_sample(ctx);
        else if (command == "sweep") cmd_sweep(ctx);
        else if (command == "fit") cmd_fit(ctx);
        else if (command == "flows") cmd_flows(ctx);
        else if (command == "oracle-check") cmd_oracle(ctx);
        else if (command == "rde") cmd_rde(ctx);
        else if (command == "gw") cmd_gw(ctx);
        else cmd_constants(ctx);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const GuardError& e) {
        err << "error: " << e.what() << '\n';
        return kExitGuard;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace treenet::cli
