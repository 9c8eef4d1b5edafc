#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "treenet/rng.hpp"

namespace treenet {

struct Atom {
    double value;
    double probability;

    bool operator==(const Atom&) const = default;
};

struct WeightMoments {
    double mean;                 // mu = E X
    double variance;             // sigma^2 = Var X
    double second_moment;        // E X^2
    double reciprocal_mean;      // E (1/X)
    double reciprocal_variance;  // Var (1/X), the variance of C_1
};

// Law of an i.i.d. edge weight X supported on [a, b] with 0 < a <= b.
//
// Every kind consumes exactly one raw 64-bit draw per sample, so streams stay
// aligned across laws.
class WeightDistribution {
public:
    enum class Kind { constant, uniform, two_point, discrete };

    static WeightDistribution constant(double value);
    static WeightDistribution uniform(double a, double b);
    static WeightDistribution two_point(double a, double b, double p_a = 0.5);
    static WeightDistribution discrete(std::vector<Atom> atoms);

    // Literal syntax: const:v, unif:a,b, twopoint:a,b[,p], disc:v1:p1,v2:p2,...
    static WeightDistribution parse(std::string_view literal);
    std::string literal() const;

    Kind kind() const { return kind_; }
    double lower() const { return a_; }
    double upper() const { return b_; }
    double p_lower() const { return p_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double sample(RngStream& rng) const {
        const double u = rng.uniform();
        switch (kind_) {
            case Kind::constant: return a_;
            case Kind::uniform: return a_ + (b_ - a_) * u;
            case Kind::two_point: return u < p_ ? a_ : b_;
            case Kind::discrete: return sample_discrete(u);
        }
        return a_;
    }

    WeightMoments moments() const;

    bool operator==(const WeightDistribution&) const = default;

private:
    WeightDistribution() = default;
    double sample_discrete(double u) const;

    Kind kind_ = Kind::constant;
    double a_ = 1.0;
    double b_ = 1.0;
    double p_ = 1.0;
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

struct OffspringAtom {
    int count;
    double probability;

    bool operator==(const OffspringAtom&) const = default;
};

// Offspring law B of an edge-rooted Galton-Watson tree; P(B = 0) must be 0.
class OffspringLaw {
public:
    explicit OffspringLaw(std::vector<OffspringAtom> atoms);

    // Literal syntax: k1:p1,k2:p2,...
    static OffspringLaw parse(std::string_view literal);
    std::string literal() const;

    int sample(RngStream& rng) const;
    double mean() const;
    double variance() const;
    int max_count() const { return atoms_.back().count; }
    const std::vector<OffspringAtom>& atoms() const { return atoms_; }

    bool operator==(const OffspringLaw& other) const { return atoms_ == other.atoms_; }

private:
    std::vector<OffspringAtom> atoms_;  // sorted by count, zero-probability entries dropped
    std::vector<double> cumulative_;
};

struct RegularShape {
    int arity = 2;
    bool operator==(const RegularShape&) const = default;
};

struct GaltonWatsonShape {
    OffspringLaw offspring;
    bool operator==(const GaltonWatsonShape&) const = default;
};

// Shape, scaling base and weight law of a random tree network. The depth is
// supplied per operation.
class TreeModel {
public:
    using Shape = std::variant<RegularShape, GaltonWatsonShape>;

    // lambda defaults to the arity (regular) or E B (Galton-Watson).
    TreeModel(Shape shape, WeightDistribution weights, std::optional<double> lambda = std::nullopt);

    // Literal syntax: reg:beta or gw:k1:p1,k2:p2,...
    static TreeModel parse(std::string_view shape_literal, const WeightDistribution& weights,
                           std::optional<double> lambda = std::nullopt);
    std::string shape_literal() const;

    const Shape& shape() const { return shape_; }
    bool is_regular() const { return std::holds_alternative<RegularShape>(shape_); }
    int arity() const;  // 0 for Galton-Watson
    const OffspringLaw& offspring() const;
    const WeightDistribution& weights() const { return weights_; }
    double lambda() const { return lambda_; }

    // Number of edge levels of a depth-n instance: n for regular trees,
    // n + 1 for Galton-Watson trees (root edge plus generations 1..n).
    int edge_levels(int depth) const { return is_regular() ? depth : depth + 1; }

private:
    Shape shape_;
    WeightDistribution weights_;
    double lambda_;
};

// Highest edge level whose scale lambda^(level-1) stays within 2^60.
int level_cap(double lambda);

// lambda^(level-1) * weight. The root edge has level 1.
double edge_resistance(int level, double weight, double lambda);

// Scale factor lambda^(level-1), computed by repeated multiplication so that
// integer bases stay exact.
double level_scale(int level, double lambda);

}  // namespace treenet
