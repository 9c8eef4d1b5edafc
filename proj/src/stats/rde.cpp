#include "treenet/error.hpp"
#include "treenet/stats.hpp"

namespace treenet {

RdePool rde_init(const WeightDistribution& weights, std::int64_t m, RngStream& rng) {
    if (m < 1) throw ValidationError("population pool size must be >= 1");
    RdePool pool;
    pool.level = 1;
    pool.values.resize(static_cast<std::size_t>(m));
    for (double& c : pool.values) c = 1.0 / weights.sample(rng);
    return pool;
}

RdePool rde_step(const RdePool& pool, const WeightDistribution& weights, RngStream& rng) {
    if (pool.values.empty()) throw ValidationError("population pool is empty");
    const auto m = static_cast<std::uint64_t>(pool.values.size());
    RdePool next;
    next.level = pool.level + 1;
    next.values.resize(pool.values.size());
    for (double& out : next.values) {
        const double c1 = pool.values[rng.below(m)];
        const double c2 = pool.values[rng.below(m)];
        const double x = weights.sample(rng);
        const double half_sum = 0.5 * (c1 + c2);
        out = half_sum / (1.0 + x * half_sum);
    }
    return next;
}

void rde_iterate(const WeightDistribution& weights, std::int64_t m, int max_level, std::uint64_t seed,
                 const std::function<void(const RdePool&)>& visit) {
    if (max_level < 1) throw ValidationError("population dynamics needs max level >= 1");
    RngStream init_rng(seed, 1);
    RdePool pool = rde_init(weights, m, init_rng);
    visit(pool);
    while (pool.level < max_level) {
        RngStream rng(seed, static_cast<std::uint64_t>(pool.level + 1));
        pool = rde_step(pool, weights, rng);
        visit(pool);
    }
}

}  // namespace treenet
