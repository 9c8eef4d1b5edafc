#include "treenet/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "treenet/error.hpp"

namespace treenet {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ValidationError("malformed number '" + std::string(text) + "' in " + std::string(what));
    }
    return value;
}

int parse_int(std::string_view text, std::string_view what) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ValidationError("malformed integer '" + std::string(text) + "' in " + std::string(what));
    }
    return value;
}

void check_support(double a, double b) {
    if (!(std::isfinite(a) && std::isfinite(b))) throw ValidationError("weight support must be finite");
    if (!(a > 0.0)) throw ValidationError("weight support lower bound a must be > 0, got " + format_number(a));
    if (a > b) throw ValidationError("weight support requires a <= b, got a=" + format_number(a) + " b=" + format_number(b));
}

void check_probability(double p, std::string_view what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " probability must lie in [0,1]");
}

}  // namespace

WeightDistribution WeightDistribution::constant(double value) {
    check_support(value, value);
    WeightDistribution d;
    d.kind_ = Kind::constant;
    d.a_ = d.b_ = value;
    d.p_ = 1.0;
    return d;
}

WeightDistribution WeightDistribution::uniform(double a, double b) {
    check_support(a, b);
    WeightDistribution d;
    d.kind_ = Kind::uniform;
    d.a_ = a;
    d.b_ = b;
    return d;
}

WeightDistribution WeightDistribution::two_point(double a, double b, double p_a) {
    check_support(a, b);
    check_probability(p_a, "two-point");
    WeightDistribution d;
    d.kind_ = Kind::two_point;
    d.a_ = a;
    d.b_ = b;
    d.p_ = p_a;
    return d;
}

WeightDistribution WeightDistribution::discrete(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ValidationError("discrete weight law needs at least one atom");
    double total = 0.0;
    for (const Atom& atom : atoms) {
        check_support(atom.value, atom.value);
        check_probability(atom.probability, "discrete atom");
        total += atom.probability;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
        throw ValidationError("discrete weight probabilities sum to " + format_number(total) + ", expected 1");
    }
    WeightDistribution d;
    d.kind_ = Kind::discrete;
    d.atoms_ = std::move(atoms);
    const auto [lo, hi] = std::minmax_element(d.atoms_.begin(), d.atoms_.end(),
                                              [](const Atom& x, const Atom& y) { return x.value < y.value; });
    d.a_ = lo->value;
    d.b_ = hi->value;
    double acc = 0.0;
    for (const Atom& atom : d.atoms_) {
        acc += atom.probability;
        d.cumulative_.push_back(acc);
    }
    return d;
}

double WeightDistribution::sample_discrete(double u) const {
    const double target = u * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto idx = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
    return atoms_[idx].value;
}

WeightDistribution WeightDistribution::parse(std::string_view literal) {
    const std::size_t colon = literal.find(':');
    if (colon == std::string_view::npos) {
        throw ValidationError("malformed distribution literal '" + std::string(literal) +
                              "': expected kind:parameters");
    }
    const std::string_view kind = literal.substr(0, colon);
    const std::string_view body = literal.substr(colon + 1);
    const std::string what = "distribution literal '" + std::string(literal) + "'";
    const auto fields = split(body, ',');

    if (kind == "const") {
        if (fields.size() != 1) throw ValidationError(what + ": const takes one value");
        return constant(parse_double(fields[0], what));
    }
    if (kind == "unif") {
        if (fields.size() != 2) throw ValidationError(what + ": unif takes a,b");
        return uniform(parse_double(fields[0], what), parse_double(fields[1], what));
    }
    if (kind == "twopoint") {
        if (fields.size() != 2 && fields.size() != 3) throw ValidationError(what + ": twopoint takes a,b[,p]");
        const double p = fields.size() == 3 ? parse_double(fields[2], what) : 0.5;
        return two_point(parse_double(fields[0], what), parse_double(fields[1], what), p);
    }
    if (kind == "disc") {
        std::vector<Atom> atoms;
        for (const auto field : fields) {
            const auto pair = split(field, ':');
            if (pair.size() != 2) throw ValidationError(what + ": disc atoms are value:probability");
            atoms.push_back({parse_double(pair[0], what), parse_double(pair[1], what)});
        }
        return discrete(std::move(atoms));
    }
    throw ValidationError("unknown distribution kind '" + std::string(kind) + "' in " + what);
}

std::string WeightDistribution::literal() const {
    switch (kind_) {
        case Kind::constant: return "const:" + format_number(a_);
        case Kind::uniform: return "unif:" + format_number(a_) + "," + format_number(b_);
        case Kind::two_point:
            return "twopoint:" + format_number(a_) + "," + format_number(b_) + "," + format_number(p_);
        case Kind::discrete: {
            std::string out = "disc:";
            for (std::size_t i = 0; i < atoms_.size(); ++i) {
                if (i) out += ',';
                out += format_number(atoms_[i].value) + ":" + format_number(atoms_[i].probability);
            }
            return out;
        }
    }
    return {};
}

WeightMoments WeightDistribution::moments() const {
    WeightMoments m{};
    switch (kind_) {
        case Kind::constant:
            m = {a_, 0.0, a_ * a_, 1.0 / a_, 0.0};
            break;
        case Kind::uniform: {
            if (a_ == b_) {
                m = {a_, 0.0, a_ * a_, 1.0 / a_, 0.0};
                break;
            }
            const double width = b_ - a_;
            m.mean = 0.5 * (a_ + b_);
            m.variance = width * width / 12.0;
            m.second_moment = (a_ * a_ + a_ * b_ + b_ * b_) / 3.0;
            m.reciprocal_mean = std::log(b_ / a_) / width;
            m.reciprocal_variance = 1.0 / (a_ * b_) - m.reciprocal_mean * m.reciprocal_mean;
            break;
        }
        case Kind::two_point: {
            const double q = 1.0 - p_;
            const double gap = b_ - a_;
            m.mean = p_ * a_ + q * b_;
            m.variance = p_ * q * gap * gap;
            m.second_moment = p_ * a_ * a_ + q * b_ * b_;
            m.reciprocal_mean = p_ / a_ + q / b_;
            const double rgap = 1.0 / a_ - 1.0 / b_;
            m.reciprocal_variance = p_ * q * rgap * rgap;
            break;
        }
        case Kind::discrete: {
            double mean = 0.0, rmean = 0.0;
            for (const Atom& atom : atoms_) {
                mean += atom.probability * atom.value;
                rmean += atom.probability / atom.value;
            }
            double var = 0.0, rvar = 0.0;
            for (const Atom& atom : atoms_) {
                var += atom.probability * (atom.value - mean) * (atom.value - mean);
                rvar += atom.probability * (1.0 / atom.value - rmean) * (1.0 / atom.value - rmean);
            }
            m = {mean, var, var + mean * mean, rmean, rvar};
            break;
        }
    }
    return m;
}

OffspringLaw::OffspringLaw(std::vector<OffspringAtom> atoms) {
    if (atoms.empty()) throw ValidationError("offspring law needs at least one atom");
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (atom.count < 0) throw ValidationError("offspring counts must be nonnegative");
        check_probability(atom.probability, "offspring");
        if (atom.count == 0 && atom.probability > 0.0) {
            throw ValidationError("offspring law must satisfy P(B=0) = 0, got P(B=0) = " +
                                  format_number(atom.probability));
        }
        total += atom.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("offspring probabilities sum to " + format_number(total) + ", expected 1");
    }
    std::sort(atoms.begin(), atoms.end(), [](const auto& x, const auto& y) { return x.count < y.count; });
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (atoms[i].count == atoms[i - 1].count) throw ValidationError("duplicate offspring count");
    }
    for (const auto& atom : atoms) {
        if (atom.probability > 0.0) atoms_.push_back({atom.count, atom.probability / total});
    }
    double acc = 0.0;
    for (const auto& atom : atoms_) {
        acc += atom.probability;
        cumulative_.push_back(acc);
    }
}

OffspringLaw OffspringLaw::parse(std::string_view literal) {
    const std::string what = "offspring literal '" + std::string(literal) + "'";
    std::vector<OffspringAtom> atoms;
    for (const auto field : split(literal, ',')) {
        const auto pair = split(field, ':');
        if (pair.size() != 2) throw ValidationError(what + ": entries are count:probability");
        atoms.push_back({parse_int(pair[0], what), parse_double(pair[1], what)});
    }
    return OffspringLaw(std::move(atoms));
}

std::string OffspringLaw::literal() const {
    std::string out;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(atoms_[i].count) + ":" + format_number(atoms_[i].probability);
    }
    return out;
}

int OffspringLaw::sample(RngStream& rng) const {
    const double target = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto idx = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
    return atoms_[idx].count;
}

double OffspringLaw::mean() const {
    double m = 0.0;
    for (const auto& atom : atoms_) m += atom.probability * atom.count;
    return m;
}

double OffspringLaw::variance() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& atom : atoms_) v += atom.probability * (atom.count - m) * (atom.count - m);
    return v;
}

TreeModel::TreeModel(Shape shape, WeightDistribution weights, std::optional<double> lambda)
    : shape_(std::move(shape)), weights_(std::move(weights)) {
    if (const auto* regular = std::get_if<RegularShape>(&shape_)) {
        if (regular->arity < 2) throw ValidationError("regular tree arity must be >= 2");
        lambda_ = lambda.value_or(static_cast<double>(regular->arity));
    } else {
        lambda_ = lambda.value_or(std::get<GaltonWatsonShape>(shape_).offspring.mean());
    }
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
        throw ValidationError("scaling base lambda must be a positive finite number");
    }
}

TreeModel TreeModel::parse(std::string_view shape_literal, const WeightDistribution& weights,
                           std::optional<double> lambda) {
    if (shape_literal.starts_with("reg:")) {
        const int arity = parse_int(shape_literal.substr(4), "model literal '" + std::string(shape_literal) + "'");
        return TreeModel(RegularShape{arity}, weights, lambda);
    }
    if (shape_literal.starts_with("gw:")) {
        return TreeModel(GaltonWatsonShape{OffspringLaw::parse(shape_literal.substr(3))}, weights, lambda);
    }
    throw ValidationError("malformed model literal '" + std::string(shape_literal) + "': expected reg:<arity> or gw:<pmf>");
}

std::string TreeModel::shape_literal() const {
    if (const auto* regular = std::get_if<RegularShape>(&shape_)) return "reg:" + std::to_string(regular->arity);
    return "gw:" + std::get<GaltonWatsonShape>(shape_).offspring.literal();
}

int TreeModel::arity() const {
    if (const auto* regular = std::get_if<RegularShape>(&shape_)) return regular->arity;
    return 0;
}

const OffspringLaw& TreeModel::offspring() const {
    if (const auto* gw = std::get_if<GaltonWatsonShape>(&shape_)) return gw->offspring;
    throw ValidationError("regular tree model has no offspring law");
}

int level_cap(double lambda) {
    constexpr int kCap = 60;
    if (lambda <= 2.0) return kCap;
    return 1 + static_cast<int>(std::floor(kCap * std::log(2.0) / std::log(lambda)));
}

double level_scale(int level, double lambda) {
    if (level < 1) throw ValidationError("edge level must be >= 1");
    if (level > level_cap(lambda)) {
        throw GuardError("edge level " + std::to_string(level) + " exceeds the cap " +
                         std::to_string(level_cap(lambda)) + " for lambda=" + format_number(lambda));
    }
    double scale = 1.0;
    for (int i = 1; i < level; ++i) scale *= lambda;
    return scale;
}

double edge_resistance(int level, double weight, double lambda) {
    if (!(weight > 0.0)) throw ValidationError("edge weight must be > 0");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
    return level_scale(level, lambda) * weight;
}

}  // namespace treenet
