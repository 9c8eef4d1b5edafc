#include <doctest.h>

#include <cmath>
#include <vector>

#include "treenet/error.hpp"
#include "treenet/evaluate.hpp"
#include "treenet/model.hpp"
#include "treenet/rng.hpp"

using namespace treenet;

namespace {

SampledTree h1() { return SampledTree::build({-1, 0, 0}, {1.0, 1.0, 2.0}, 2.0, 2); }

// Root edge; v with two children, one with 1 child and the other with 3.
SampledTree g1() { return SampledTree::build({-1, 0, 1, 0, 3, 3, 3}, std::vector<double>(7, 1.0), 2.0); }

// Independent recursive evaluation straight from the parent list.
double reference_resistance(const SampledTree& t, std::size_t i) {
    double g = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t.edge(j).parent == static_cast<std::int32_t>(i)) g += 1.0 / reference_resistance(t, j);
    }
    return t.edge(i).resistance + (g > 0.0 ? 1.0 / g : 0.0);
}

}  // namespace

TEST_CASE("H1 layout and resistance") {
    const SampledTree t = h1();
    REQUIRE(t.size() == 3);
    CHECK(t.edge(0).level == 1);
    CHECK(t.edge(1).level == 2);
    CHECK(t.edge(2).level == 2);
    CHECK(t.edge(0).resistance == 1.0);
    CHECK(t.edge(1).resistance == 2.0);
    CHECK(t.edge(2).resistance == 4.0);
    const auto s = resistance_of_tree(t);
    CHECK(s.resistance == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(s.conductance == 1.0 / s.resistance);
    CHECK(s.n == 2);
}

TEST_CASE("single edge") {
    const SampledTree t = SampledTree::build({-1}, {0.8}, 2.0, 2);
    CHECK(resistance_of_tree(t).resistance == 0.8);
}

TEST_CASE("irregular instance G1") {
    const SampledTree t = g1();
    CHECK(resistance_of_tree(t).resistance == doctest::Approx(22.0 / 7.0).epsilon(1e-15));
    const auto z = tree_generations(t);
    CHECK(z == std::vector<std::int64_t>{1, 2, 4});
    CHECK(gw_shorted_resistance(z, 2.0) == 3.0);
    CHECK(level_shorted_resistance(t) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(gw_shorted_resistance(z, 2.0) < resistance_of_tree(t).resistance);
}

TEST_CASE("malformed layouts are rejected") {
    CHECK_THROWS_AS(SampledTree::build({0, 0}, {1.0, 1.0}, 2.0), ValidationError);
    CHECK_THROWS_AS(SampledTree::build({-1, 1}, {1.0, 1.0}, 2.0), ValidationError);
    // Leaf above the deepest level.
    CHECK_THROWS_AS(SampledTree::build({-1, 0, 1, 0}, std::vector<double>(4, 1.0), 2.0), ValidationError);
    // Wrong arity for a regular tree.
    CHECK_THROWS_AS(SampledTree::build({-1, 0}, {1.0, 1.0}, 2.0, 2), ValidationError);
    CHECK_THROWS_AS(SampledTree::build({-1}, {0.0}, 2.0), ValidationError);
}

TEST_CASE("explicit sampling shapes") {
    const auto unif = WeightDistribution::uniform(0.5, 1.5);
    RngStream rng(1, 0);
    const SampledTree t = sample_tree_explicit(TreeModel::parse("reg:2", unif), 2, rng);
    REQUIRE(t.size() == 3);
    CHECK(t.edge(0).level == 1);
    CHECK(t.edge(1).level == 2);
    CHECK(t.edge(2).level == 2);

    const TreeModel two(GaltonWatsonShape{OffspringLaw({{2, 1.0}})}, WeightDistribution::constant(1.0));
    RngStream rng2(1, 0);
    const SampledTree g = sample_tree_explicit(two, 3, rng2);
    CHECK(tree_generations(g) == std::vector<std::int64_t>{1, 2, 4, 8});
}

TEST_CASE("explicit sampling guards") {
    const TreeModel model = TreeModel::parse("reg:2", WeightDistribution::constant(1.0));
    RngStream rng(1, 0);
    CHECK_THROWS_AS(sample_tree_explicit(model, 26, rng), GuardError);
    const TreeModel gw(GaltonWatsonShape{OffspringLaw({{2, 1.0}})}, WeightDistribution::constant(1.0));
    RngStream rng2(1, 0);
    CHECK_THROWS_AS(sample_tree_explicit(gw, 10, rng2, 100), GuardError);
}

TEST_CASE("Galton-Watson generations") {
    RngStream rng(4, 0);
    CHECK(gw_generations(OffspringLaw({{2, 1.0}}), 3, rng) == std::vector<std::int64_t>{1, 2, 4, 8});
    CHECK(gw_generations(OffspringLaw({{1, 1.0}}), 5, rng) == std::vector<std::int64_t>(6, 1));
    for (std::uint64_t s = 0; s < 50; ++s) {
        RngStream r(s, 0);
        const auto z = gw_generations(OffspringLaw::parse("1:0.5,2:0.5"), 2, r);
        CHECK((z[1] == 1 || z[1] == 2));
        CHECK(z[2] >= z[1]);
        CHECK(z[2] <= 2 * z[1]);
    }
    RngStream g(1, 0);
    CHECK_THROWS_AS(gw_generations(OffspringLaw({{2, 1.0}}), 30, g, 1000), GuardError);
}

TEST_CASE("shorted resistance formula and W estimate") {
    const std::vector<std::int64_t> binary = {1, 2, 4, 8};
    CHECK(gw_shorted_resistance(binary, 2.0) == 4.0);
    const std::vector<std::int64_t> path(8, 1);
    CHECK(gw_shorted_resistance(path, 1.0) == 8.0);
    for (int n = 1; n < 20; ++n) {
        CHECK(gw_w_estimate(std::int64_t{1} << n, 2.0, n) == 1.0);
    }
    CHECK(gw_w_estimate(243, 3.0, 5) == 1.0);
}

TEST_CASE("W estimate support envelope for B uniform on {1,2}") {
    const TreeModel model(GaltonWatsonShape{OffspringLaw::parse("1:0.5,2:0.5")}, WeightDistribution::constant(1.0));
    for (std::uint64_t s = 0; s < 30; ++s) {
        RngStream rng(s, 0);
        const int n = 8;
        const auto z = tree_generations(sample_tree_explicit(model, n, rng));
        const double w = gw_w_estimate(z.back(), 1.5, n);
        CHECK(w >= std::pow(1.0 / 1.5, n) * (1 - 1e-12));
        CHECK(w <= std::pow(2.0 / 1.5, n) * (1 + 1e-12));
    }
}

TEST_CASE("B identically 2 with unit weights gives R = n + 1 exactly") {
    const TreeModel model(GaltonWatsonShape{OffspringLaw({{2, 1.0}})}, WeightDistribution::constant(1.0));
    for (int n = 1; n <= 12; ++n) {
        RngStream rng(2, 0);
        const SampledTree t = sample_tree_explicit(model, n, rng);
        CHECK(resistance_of_tree(t).resistance == static_cast<double>(n + 1));
        CHECK(gw_shorted_resistance(tree_generations(t), 2.0) == static_cast<double>(n + 1));
    }
}

TEST_CASE("streaming and explicit evaluators agree bit for bit") {
    for (const char* dist : {"unif:0.5,1.5", "twopoint:0.5,1.5", "disc:0.5:0.2,1:0.3,1.7:0.5"}) {
        for (const char* shape : {"reg:2", "reg:3"}) {
            const TreeModel model = TreeModel::parse(shape, WeightDistribution::parse(dist));
            for (int n = 1; n <= 7; ++n) {
                for (std::uint64_t j = 0; j < 5; ++j) {
                    RngStream a(11, j), b(11, j);
                    const double streamed = resistance_streaming(model, n, a).resistance;
                    const double folded = resistance_of_tree(sample_tree_explicit(model, n, b)).resistance;
                    CHECK(streamed == folded);
                    CHECK(a() == b());
                }
            }
        }
    }
    const TreeModel gw = TreeModel::parse("gw:1:0.5,2:0.5", WeightDistribution::constant(1.0));
    RngStream rng(1, 0);
    CHECK_THROWS_AS(resistance_streaming(gw, 3, rng), ValidationError);
}

TEST_CASE("fold matches an independent recursive evaluation") {
    const TreeModel model = TreeModel::parse("gw:1:0.3,2:0.4,3:0.3", WeightDistribution::uniform(0.5, 1.5));
    for (std::uint64_t s = 0; s < 20; ++s) {
        RngStream rng(s, 0);
        const SampledTree t = sample_tree_explicit(model, 4, rng);
        CHECK(resistance_of_tree(t).resistance == doctest::Approx(reference_resistance(t, 0)).epsilon(1e-13));
        CHECK(level_shorted_resistance(t) <= resistance_of_tree(t).resistance + 1e-12);
    }
}

TEST_CASE("envelope a n <= R <= b n") {
    const TreeModel model = TreeModel::parse("reg:2", WeightDistribution::two_point(0.5, 1.5));
    for (std::uint64_t j = 0; j < 200; ++j) {
        RngStream rng(3, j);
        const auto s = resistance_streaming(model, 12, rng);
        CHECK(s.resistance >= 6.0);
        CHECK(s.resistance <= 18.0);
        CHECK(s.conductance >= 1.0 / 18.0);
        CHECK(s.conductance <= 1.0 / 6.0);
    }
}

TEST_CASE("constant weights give R = c n") {
    for (const double c : {1.0, 0.75, 1.3}) {
        const TreeModel model = TreeModel::parse("reg:2", WeightDistribution::constant(c));
        for (int n = 1; n <= 16; ++n) {
            RngStream rng(1, 0);
            const auto s = resistance_streaming(model, n, rng);
            CHECK(std::abs(s.resistance - c * n) <= 1e-12 * c * n);
            CHECK(s.conductance == doctest::Approx(1.0 / (c * n)).epsilon(1e-12));
        }
    }
    const TreeModel unit = TreeModel::parse("reg:2", WeightDistribution::constant(1.0));
    for (int n = 1; n <= 20; ++n) {
        RngStream rng(1, 0);
        CHECK(resistance_streaming(unit, n, rng).resistance == static_cast<double>(n));
    }
}

TEST_CASE("Rayleigh monotonicity") {
    const TreeModel model = TreeModel::parse("reg:2", WeightDistribution::uniform(0.5, 1.5));
    RngStream rng(8, 0);
    const SampledTree t = sample_tree_explicit(model, 6, rng);
    const double base = resistance_of_tree(t).resistance;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const SampledTree up = t.with_weight(i, t.edge(i).weight * 1.25);
        CHECK(resistance_of_tree(up).resistance >= base);
        const SampledTree down = t.with_weight(i, t.edge(i).weight * 0.8);
        CHECK(resistance_of_tree(down).resistance <= base);
    }
}

TEST_CASE("subtree resistances") {
    const auto sub = subtree_resistances(h1());
    REQUIRE(sub.size() == 3);
    CHECK(sub[1] == 2.0);
    CHECK(sub[2] == 4.0);
    CHECK(sub[0] == doctest::Approx(7.0 / 3.0));
}
