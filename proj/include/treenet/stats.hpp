#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "treenet/evaluate.hpp"
#include "treenet/model.hpp"
#include "treenet/rng.hpp"

namespace treenet {

// ---------------------------------------------------------------------------
// Replicates and moments

// Master seed used for depth n when a run covers several depths, so that
// different depths draw from unrelated streams.
inline std::uint64_t depth_seed(std::uint64_t master_seed, int n) {
    return mix_seed(master_seed, static_cast<std::uint64_t>(n));
}

// m replicates of the depth-n resistance; replicate j uses RngStream(seed, j).
// Regular models use the streaming evaluator, Galton-Watson models an
// explicit tree. The output does not depend on `workers`.
std::vector<ResistanceSample> run_replicates(const TreeModel& model, int n, std::int64_t m, std::uint64_t seed,
                                             int workers = 1);

inline constexpr double kReportedQuantiles[] = {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0};

struct SampleMoments {
    std::int64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;     // unbiased (m - 1 denominator)
    double m2 = 0.0;           // second central moment, 1/m normalization
    double m3 = 0.0;           // third central moment, 1/m normalization
    double m4 = 0.0;           // fourth central moment, 1/m normalization
    double se_mean = 0.0;      // sqrt(variance / m)
    double se_variance = 0.0;  // delete-1 jackknife; NaN when m < 3
    std::vector<double> quantiles;  // at kReportedQuantiles (type-7 interpolation)

    double min() const { return quantiles.front(); }
    double max() const { return quantiles.back(); }
};

// Two-pass central moments with Neumaier-compensated sums. Requires m >= 2.
SampleMoments summarize(std::span<const double> values);

struct MomentReport {
    int n = 0;
    std::int64_t m = 0;
    SampleMoments resistance;
    SampleMoments conductance;
};

MomentReport estimate_moments(std::span<const ResistanceSample> samples);

// Signed slack of the deterministic envelope a n <= R <= b n, normalized by
// n: min(R - a n, b n - R) / n. Defined for regular models with lambda equal
// to the arity; returns nullopt otherwise.
std::optional<double> envelope_slack(const TreeModel& model, int n, double resistance);

// ---------------------------------------------------------------------------
// Tails

struct TailRow {
    double t = 0.0;
    std::int64_t count = 0;
    double freq = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    std::optional<double> bound;  // 2 exp(-t^2 / (4 C))
};

struct TailReport {
    int n = 0;
    std::int64_t m = 0;
    double mean = 0.0;
    std::optional<double> constant;
    std::vector<TailRow> rows;
};

struct Interval {
    double lo;
    double hi;
};

// 95% Wilson score interval for `count` successes out of `trials`.
Interval wilson_interval(std::int64_t count, std::int64_t trials, double z = 1.959963984540054);

// Frequencies of |value - sample mean| > t over the grid. Requires m >= 100.
TailReport tail_profile(std::span<const double> values, std::span<const double> t_grid,
                        std::optional<double> constant = std::nullopt, int n = 0);

std::vector<double> default_tail_grid();  // 0.1, 0.2, ..., 3.0

// ---------------------------------------------------------------------------
// Explicit variance bound for the conductance

struct ConductanceVarianceBound {
    double k0 = 0.0;  // (1/2) (b/a)^4 (1/b - 1/a)^2
    double k1 = 0.0;  // max(k0, Var C_1)
    double k = 0.0;   // max(b^4, 1) k1
    double bound = 0.0;  // 2^10 k / n^4
};

ConductanceVarianceBound conductance_variance_bound(double a, double b, double var_c1, int n);

// ---------------------------------------------------------------------------
// Population dynamics for the conductance recursion
// C_{n+1} = s / (1 + X s), s = (C_n + C'_n) / 2.

struct RdePool {
    int level = 1;
    std::vector<double> values;
};

// Level-1 pool of m independent draws of 1 / X.
RdePool rde_init(const WeightDistribution& weights, std::int64_t m, RngStream& rng);

// One level of the recursion. Each output entry resamples two parents
// uniformly with replacement and draws a fresh X, in that order.
RdePool rde_step(const RdePool& pool, const WeightDistribution& weights, RngStream& rng);

// Level-by-level iteration; level l >= 2 consumes RngStream(seed, l) and the
// initial pool RngStream(seed, 1). Calls `visit` on every pool, level 1 included.
void rde_iterate(const WeightDistribution& weights, std::int64_t m, int max_level, std::uint64_t seed,
                 const std::function<void(const RdePool&)>& visit);

// ---------------------------------------------------------------------------
// Asymptotic fits

struct FitPoint {
    double n = 0.0;
    double value = 0.0;
    double se = 0.0;
};

struct FitResidual {
    double n;
    double value;
    double se;
    double fitted;
    double residual;
    double constrained_residual;  // value - (mu n - (sigma^2 / mu) ln n)
};

struct FitReport {
    double alpha = 0.0;  // coefficient of n
    double beta = 0.0;   // coefficient of ln n
    double gamma = 0.0;  // constant
    double se_alpha = 0.0;
    double se_beta = 0.0;
    double se_gamma = 0.0;
    double target_alpha = 0.0;  // mu
    double target_beta = 0.0;   // -sigma^2 / mu
    double chi2 = 0.0;
    std::vector<FitResidual> residuals;
    double band_n_min = 0.0;
    double band_n_max = 0.0;
    double band_min = 0.0;  // range of constrained residuals over [band_n_min, band_n_max]
    double band_max = 0.0;

    double band_range() const { return band_max - band_min; }
};

// Weighted least squares of value on (n, ln n, 1) with weights 1/se^2 (or
// unweighted when every se is zero). Requires >= 6 points with distinct n.
// The constrained-residual band covers points with n in [band_lo, band_hi];
// by default the whole grid.
FitReport fit_expectation(std::span<const FitPoint> grid, double mu, double sigma2,
                          std::optional<double> band_lo = std::nullopt, std::optional<double> band_hi = std::nullopt);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares slope of ln(value) against ln(n). Requires >= 3 points, all
// values positive.
SlopeFit fit_variance_slope(std::span<const FitPoint> grid);

double pearson_correlation(std::span<const double> x, std::span<const double> y);
double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Experiments

struct SweepResult {
    std::vector<MomentReport> reports;
    double min_envelope_slack = 0.0;  // over every sample; NaN when undefined for the model
};

// Depth n uses run_replicates with master seed depth_seed(seed, n).
SweepResult run_sweep(const TreeModel& model, std::span<const int> depths,
                      const std::function<std::int64_t(int)>& reps_for, std::uint64_t seed, int workers = 1);

struct GwRecord {
    std::int64_t tree = 0;
    int b1 = 0;                // offspring count of the depth-0 vertex
    double resistance = 0.0;   // exact, all depth-n vertices grounded together
    double shorted = 0.0;      // every generation shorted; <= resistance
    double shorted_unit = 0.0; // sum lambda^i / Z_i
    double w_hat = 0.0;        // Z_n / lambda^n
    double n_conductance = 0.0;  // n / resistance
};

struct ConditionalMean {
    std::int64_t count = 0;
    double mean = 0.0;
    double se = 0.0;
};

struct GwExperiment {
    int n = 0;
    std::vector<GwRecord> records;
    std::map<int, ConditionalMean> n_conductance_by_b1;
    double correlation_r_over_n_inv_w = 0.0;  // Pearson(R / n, 1 / W_hat)
    double median_r_over_n_times_w = 0.0;     // median(R / n * W_hat)
    double min_shorting_slack = 0.0;          // min(resistance - shorted)
};

// Tree i uses RngStream(seed, i).
GwExperiment gw_experiment(const TreeModel& model, int n, std::int64_t trees, std::uint64_t seed, int workers = 1);

struct FlowRecord {
    std::int64_t instance = 0;
    int n = 0;
    double resistance = 0.0;
    double energy = 0.0;
    double energy_gap = 0.0;  // |energy - R| / R
    double max_node_law = 0.0;
    double max_ohm = 0.0;
    double unit_flux = 0.0;
    double max_splitting = 0.0;
    double min_perturbation_slack = 0.0;  // min over perturbations of (perturbed energy - R)
    double min_current_margin = 0.0;      // NaN unless binary
    double s4 = 0.0;                      // NaN unless binary
    double s4_unscaled = 0.0;
    double b4 = 0.0;
    double envelope_slack = 0.0;          // NaN when undefined
};

struct FlowExperiment {
    std::vector<FlowRecord> records;
    SampleMoments resistance;      // across instances
    double mean_s4 = 0.0;
    double mean_s4_unscaled = 0.0;
    double efron_stein_bound = 0.0;  // (b - a)^2 mean_s4
    double efron_stein_bound_unscaled = 0.0;  // (b - a)^2 / 2 mean_s4_unscaled
};

// Instance i samples an explicit tree from RngStream(seed, i) and then draws
// its perturbations (leaf pair, eps in {+-1e-3, +-1e-2}) from the same stream.
FlowExperiment flow_experiment(const TreeModel& model, int n, std::int64_t instances, int perturbations,
                               std::uint64_t seed, int workers = 1);

struct OracleRecord {
    std::int64_t instance = 0;
    int n = 0;
    std::int64_t edges = 0;
    double r_fold = 0.0;
    double r_flow = 0.0;
    double r_oracle = 0.0;
    double resistance_gap = 0.0;
    double current_gap = 0.0;
    double voltage_gap = 0.0;
    double residual = 0.0;
    bool diagonally_dominant = false;
};

// Instance i has depth depths[i % depths.size()] and uses RngStream(seed, i).
std::vector<OracleRecord> oracle_experiment(const TreeModel& model, std::span<const int> depths,
                                            std::int64_t instances, std::uint64_t seed, int workers = 1);

}  // namespace treenet
