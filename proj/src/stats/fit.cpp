#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "treenet/error.hpp"
#include "treenet/stats.hpp"

namespace treenet {

FitReport fit_expectation(std::span<const FitPoint> grid, double mu, double sigma2, std::optional<double> band_lo,
                          std::optional<double> band_hi) {
    if (grid.size() < 6) throw ValidationError("expectation fit needs at least 6 grid points");
    std::set<double> distinct;
    for (const auto& p : grid) {
        if (!(p.n > 0.0)) throw ValidationError("expectation fit needs positive n values");
        if (p.se < 0.0) throw ValidationError("standard errors must be >= 0");
        distinct.insert(p.n);
    }
    if (distinct.size() != grid.size()) throw ValidationError("expectation fit needs distinct n values");

    const bool any_zero = std::any_of(grid.begin(), grid.end(), [](const FitPoint& p) { return p.se == 0.0; });
    const bool all_zero = std::all_of(grid.begin(), grid.end(), [](const FitPoint& p) { return p.se == 0.0; });
    if (any_zero && !all_zero) throw ValidationError("expectation fit has a mix of zero and positive SEs");

    const auto rows = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd design(rows, 3);
    Eigen::VectorXd target(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const FitPoint& p = grid[i];
        const double w = all_zero ? 1.0 : 1.0 / p.se;
        design(i, 0) = w * p.n;
        design(i, 1) = w * std::log(p.n);
        design(i, 2) = w;
        target(i) = w * p.value;
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3) throw ValidationError("degenerate design: (n, ln n, 1) columns are collinear on this grid");
    const Eigen::Vector3d coef = qr.solve(target);

    FitReport report;
    report.alpha = coef(0);
    report.beta = coef(1);
    report.gamma = coef(2);
    report.target_alpha = mu;
    report.target_beta = -sigma2 / mu;

    const Eigen::VectorXd weighted_residual = target - design * coef;
    report.chi2 = weighted_residual.squaredNorm();
    // Known SEs give the covariance (X'WX)^-1 directly; without them it is
    // scaled by the residual variance.
    Eigen::Matrix3d cov = (design.transpose() * design).inverse();
    if (all_zero) cov *= rows > 3 ? report.chi2 / static_cast<double>(rows - 3) : 0.0;
    report.se_alpha = std::sqrt(cov(0, 0));
    report.se_beta = std::sqrt(cov(1, 1));
    report.se_gamma = std::sqrt(cov(2, 2));

    report.band_n_min = band_lo.value_or(-std::numeric_limits<double>::infinity());
    report.band_n_max = band_hi.value_or(std::numeric_limits<double>::infinity());
    bool band_empty = true;
    for (const auto& p : grid) {
        const double fitted = report.alpha * p.n + report.beta * std::log(p.n) + report.gamma;
        const double constrained = p.value - (mu * p.n - sigma2 / mu * std::log(p.n));
        report.residuals.push_back({p.n, p.value, p.se, fitted, p.value - fitted, constrained});
        if (p.n < report.band_n_min || p.n > report.band_n_max) continue;
        if (band_empty) {
            report.band_min = report.band_max = constrained;
            band_empty = false;
        } else {
            report.band_min = std::min(report.band_min, constrained);
            report.band_max = std::max(report.band_max, constrained);
        }
    }
    if (band_empty) throw ValidationError("constrained-residual band window contains no grid points");
    if (!band_lo) report.band_n_min = *distinct.begin();
    if (!band_hi) report.band_n_max = *distinct.rbegin();
    return report;
}

SlopeFit fit_variance_slope(std::span<const FitPoint> grid) {
    if (grid.size() < 3) throw ValidationError("variance slope fit needs at least 3 grid points");
    double sx = 0.0, sy = 0.0;
    for (const auto& p : grid) {
        if (!(p.value > 0.0)) {
            throw ValidationError("variance slope fit needs positive variances (deterministic weights give zero)");
        }
        if (!(p.n > 0.0)) throw ValidationError("variance slope fit needs positive n values");
        sx += std::log(p.n);
        sy += std::log(p.value);
    }
    const double k = static_cast<double>(grid.size());
    const double mx = sx / k, my = sy / k;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : grid) {
        const double dx = std::log(p.n) - mx;
        sxy += dx * (std::log(p.value) - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw ValidationError("variance slope fit needs distinct n values");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace treenet
