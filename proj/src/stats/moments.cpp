#include <algorithm>
#include <cmath>
#include <limits>

#include "treenet/error.hpp"
#include "treenet/stats.hpp"

namespace treenet {

namespace {

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

SampleMoments summarize(std::span<const double> values) {
    const auto m = static_cast<std::int64_t>(values.size());
    if (m < 2) throw ValidationError("moment estimation needs at least 2 samples, got " + std::to_string(m));
    const double dm = static_cast<double>(m);

    CompensatedSum total;
    for (const double x : values) total.add(x);
    const double mean = total.value() / dm;

    CompensatedSum s2, s3, s4;
    for (const double x : values) {
        const double d = x - mean;
        const double d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }

    SampleMoments out;
    out.count = m;
    out.mean = mean;
    out.m2 = s2.value() / dm;
    out.m3 = s3.value() / dm;
    out.m4 = s4.value() / dm;
    out.variance = s2.value() / (dm - 1.0);
    out.se_mean = std::sqrt(out.variance / dm);

    if (m >= 3) {
        // Delete-1 variance: (S - d_i^2 m/(m-1)) / (m-2) with S the full sum of squares.
        const double ss = s2.value();
        CompensatedSum jk_sum;
        std::vector<double> loo(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double d = values[i] - mean;
            loo[i] = (ss - d * d * dm / (dm - 1.0)) / (dm - 2.0);
            jk_sum.add(loo[i]);
        }
        const double jk_mean = jk_sum.value() / dm;
        CompensatedSum jk_sq;
        for (const double v : loo) jk_sq.add((v - jk_mean) * (v - jk_mean));
        out.se_variance = std::sqrt((dm - 1.0) / dm * jk_sq.value());
    } else {
        out.se_variance = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    for (const double q : kReportedQuantiles) out.quantiles.push_back(quantile_sorted(sorted, q));
    return out;
}

MomentReport estimate_moments(std::span<const ResistanceSample> samples) {
    std::vector<double> r, c;
    r.reserve(samples.size());
    c.reserve(samples.size());
    for (const auto& s : samples) {
        r.push_back(s.resistance);
        c.push_back(s.conductance);
    }
    MomentReport report;
    report.n = samples.empty() ? 0 : samples.front().n;
    report.m = static_cast<std::int64_t>(samples.size());
    report.resistance = summarize(r);
    report.conductance = summarize(c);
    return report;
}

std::optional<double> envelope_slack(const TreeModel& model, int n, double resistance) {
    if (!model.is_regular() || model.lambda() != static_cast<double>(model.arity())) return std::nullopt;
    const double a = model.weights().lower();
    const double b = model.weights().upper();
    return std::min(resistance - a * n, b * n - resistance) / n;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("correlation needs two equal-length samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

Interval wilson_interval(std::int64_t count, std::int64_t trials, double z) {
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(count) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    const double lo = count == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = count == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

std::vector<double> default_tail_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i) grid.push_back(i / 10.0);
    return grid;
}

TailReport tail_profile(std::span<const double> values, std::span<const double> t_grid,
                        std::optional<double> constant, int n) {
    const auto m = static_cast<std::int64_t>(values.size());
    if (m < 100) throw ValidationError("tail profile needs at least 100 samples, got " + std::to_string(m));
    CompensatedSum total;
    for (const double x : values) total.add(x);

    TailReport report;
    report.n = n;
    report.m = m;
    report.mean = total.value() / static_cast<double>(m);
    report.constant = constant;

    std::vector<double> deviation;
    deviation.reserve(values.size());
    for (const double x : values) deviation.push_back(std::abs(x - report.mean));
    std::sort(deviation.begin(), deviation.end());

    for (const double t : t_grid) {
        const auto above = std::upper_bound(deviation.begin(), deviation.end(), t);
        const auto count = static_cast<std::int64_t>(deviation.end() - above);
        const Interval ci = wilson_interval(count, m);
        TailRow row{t, count, static_cast<double>(count) / static_cast<double>(m), ci.lo, ci.hi, std::nullopt};
        if (constant) {
            row.bound = *constant > 0.0 ? 2.0 * std::exp(-t * t / (4.0 * *constant)) : (t > 0.0 ? 0.0 : 2.0);
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace treenet
