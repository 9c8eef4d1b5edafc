#include <algorithm>
#include <cmath>

#include "treenet/error.hpp"
#include "treenet/stats.hpp"

namespace treenet {

ConductanceVarianceBound conductance_variance_bound(double a, double b, double var_c1, int n) {
    if (!(a > 0.0) || a > b) throw ValidationError("conductance variance bound requires 0 < a <= b");
    if (var_c1 < 0.0) throw ValidationError("Var C_1 must be >= 0");
    if (n < 1) throw ValidationError("conductance variance bound requires n >= 1");
    ConductanceVarianceBound out;
    const double reciprocal_gap = 1.0 / b - 1.0 / a;
    out.k0 = 0.5 * std::pow(b / a, 4) * reciprocal_gap * reciprocal_gap;
    out.k1 = std::max(out.k0, var_c1);
    out.k = std::max(std::pow(b, 4), 1.0) * out.k1;
    out.bound = 1024.0 * out.k / std::pow(static_cast<double>(n), 4);
    return out;
}

}  // namespace treenet
