#include <charconv>
#include <cmath>
#include <json.hpp>

#include "treenet/cli.hpp"
#include "treenet/error.hpp"

namespace treenet::cli {

namespace {

using nlohmann::json;

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

template <class T>
T parse_number(std::string_view text, std::string_view field) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ValidationError("malformed value '" + std::string(text) + "' for " + std::string(field));
    }
    return value;
}

std::pair<int, int> parse_range(std::string_view text, std::string_view field) {
    const std::size_t dots = text.find("..");
    if (dots == std::string_view::npos) {
        const int v = parse_number<int>(text, field);
        return {v, v};
    }
    const int lo = parse_number<int>(text.substr(0, dots), field);
    const int hi = parse_number<int>(text.substr(dots + 2), field);
    if (lo > hi) throw ValidationError("empty range '" + std::string(text) + "' for " + std::string(field));
    return {lo, hi};
}

template <class T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

}  // namespace

std::int64_t RepsSpec::for_n(int n) const {
    if (const auto it = by_n.find(n); it != by_n.end()) return it->second;
    if (default_reps) return *default_reps;
    throw ValidationError("reps: no replicate count given for n=" + std::to_string(n));
}

RepsSpec RepsSpec::parse(std::string_view literal) {
    RepsSpec spec;
    for (const auto entry : split(literal, ',')) {
        const std::size_t colon = entry.find(':');
        if (colon == std::string_view::npos) {
            spec.default_reps = parse_number<std::int64_t>(entry, "reps");
            if (*spec.default_reps < 1) throw ValidationError("reps must be >= 1");
            continue;
        }
        const auto [lo, hi] = parse_range(entry.substr(0, colon), "reps");
        const auto m = parse_number<std::int64_t>(entry.substr(colon + 1), "reps");
        if (m < 1) throw ValidationError("reps must be >= 1");
        for (int n = lo; n <= hi; ++n) spec.by_n[n] = m;
    }
    return spec;
}

std::string RepsSpec::literal() const {
    std::string out;
    if (default_reps) out = std::to_string(*default_reps);
    for (const auto& [n, m] : by_n) {
        if (!out.empty()) out += ',';
        out += std::to_string(n) + ":" + std::to_string(m);
    }
    return out;
}

std::vector<int> parse_depths(std::string_view literal) {
    std::vector<int> depths;
    for (const auto entry : split(literal, ',')) {
        const auto [lo, hi] = parse_range(entry, "n");
        for (int n = lo; n <= hi; ++n) depths.push_back(n);
    }
    for (const int n : depths) {
        if (n < 1) throw ValidationError("n values must be >= 1");
    }
    return depths;
}

std::vector<double> parse_grid(std::string_view literal) {
    std::vector<double> grid;
    for (const auto entry : split(literal, ',')) {
        const double t = parse_number<double>(entry, "t-grid");
        if (!std::isfinite(t) || t < 0.0) throw ValidationError("t-grid values must be finite and >= 0");
        grid.push_back(t);
    }
    return grid;
}

std::string emit_config(const ExperimentConfig& c) {
    json by_n = json::object();
    for (const auto& [n, m] : c.reps.by_n) by_n[std::to_string(n)] = m;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j = {
        {"model", c.model},
        {"lambda", opt(c.lambda)},
        {"dist", c.dist},
        {"n", c.n},
        {"reps", {{"default", c.reps.default_reps ? json(*c.reps.default_reps) : json(nullptr)}, {"by_n", by_n}}},
        {"seed", c.seed},
        {"out_dir", c.out_dir},
        {"workers", c.workers},
        {"format", c.format},
        {"t_grid", c.t_grid},
        {"pool", c.pool},
        {"pool_replicates", c.pool_replicates},
        {"instances", c.instances},
        {"perturbations", c.perturbations},
        {"input", c.input},
        {"a", opt(c.a)},
        {"b", opt(c.b)},
        {"band_min", opt(c.band_min)},
        {"band_max", opt(c.band_max)},
        {"dump_instance", c.dump_instance},
    };
    return j.dump(2);
}

ExperimentConfig parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");

    static const char* const kKnown[] = {"model", "lambda", "dist", "n", "reps", "seed", "out_dir", "workers",
                                         "format", "t_grid", "pool", "pool_replicates", "instances", "perturbations", "input",
                                         "a", "b", "band_min", "band_max", "dump_instance"};
    for (const auto& item : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), item.key()) == std::end(kKnown)) {
            throw ValidationError("config: unknown field '" + item.key() + "'");
        }
    }

    ExperimentConfig c;
    std::string current = "";
    try {
        current = "model";
        if (j.contains("model")) c.model = j.at("model").get<std::string>();
        current = "lambda";
        c.lambda = optional_field<double>(j, "lambda");
        current = "dist";
        if (j.contains("dist")) c.dist = j.at("dist").get<std::string>();
        current = "n";
        if (j.contains("n")) c.n = j.at("n").get<std::vector<int>>();
        current = "reps";
        if (j.contains("reps")) {
            const json& r = j.at("reps");
            if (r.is_number_integer()) {
                c.reps = RepsSpec{r.get<std::int64_t>(), {}};
            } else if (r.is_string()) {
                c.reps = RepsSpec::parse(r.get<std::string>());
            } else {
                c.reps.default_reps = optional_field<std::int64_t>(r, "default");
                c.reps.by_n.clear();
                if (r.contains("by_n")) {
                    for (const auto& item : r.at("by_n").items()) {
                        c.reps.by_n[std::stoi(item.key())] = item.value().get<std::int64_t>();
                    }
                }
            }
        }
        current = "seed";
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        current = "out_dir";
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        current = "workers";
        if (j.contains("workers")) c.workers = j.at("workers").get<int>();
        current = "format";
        if (j.contains("format")) c.format = j.at("format").get<std::string>();
        current = "t_grid";
        if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
        current = "pool";
        if (j.contains("pool")) c.pool = j.at("pool").get<std::int64_t>();
        current = "pool_replicates";
        if (j.contains("pool_replicates")) c.pool_replicates = j.at("pool_replicates").get<int>();
        current = "instances";
        if (j.contains("instances")) c.instances = j.at("instances").get<std::int64_t>();
        current = "perturbations";
        if (j.contains("perturbations")) c.perturbations = j.at("perturbations").get<int>();
        current = "input";
        if (j.contains("input")) c.input = j.at("input").get<std::string>();
        current = "a";
        c.a = optional_field<double>(j, "a");
        current = "b";
        c.b = optional_field<double>(j, "b");
        current = "band_min";
        c.band_min = optional_field<double>(j, "band_min");
        current = "band_max";
        c.band_max = optional_field<double>(j, "band_max");
        current = "dump_instance";
        if (j.contains("dump_instance")) c.dump_instance = j.at("dump_instance").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw ValidationError("config field '" + current + "': " + e.what());
    } catch (const std::invalid_argument&) {
        throw ValidationError("config field '" + current + "': malformed depth key");
    }
    return c;
}

}  // namespace treenet::cli
