#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treenet::cli {

// Replicate counts per depth: a default plus per-depth overrides.
// Literal syntax: comma-separated entries, each `m` (default), `n:m` or
// `lo..hi:m`, e.g. "20000,15..18:5000".
struct RepsSpec {
    std::optional<std::int64_t> default_reps;
    std::map<int, std::int64_t> by_n;

    std::int64_t for_n(int n) const;
    static RepsSpec parse(std::string_view literal);
    std::string literal() const;
    bool operator==(const RepsSpec&) const = default;
};

// Everything a run needs. Every field has a flag of the same name (dashes
// for underscores); flags override values read from --config.
struct ExperimentConfig {
    std::string model = "reg:2";
    std::optional<double> lambda;
    std::string dist = "unif:0.5,1.5";
    std::vector<int> n;  // empty: the subcommand's default grid
    RepsSpec reps{1000, {}};
    std::uint64_t seed = 1;
    std::string out_dir;  // empty: $TREENET_OUT_DIR, else "."
    int workers = 1;
    std::string format = "csv";
    std::vector<double> t_grid;  // empty: 0.1, 0.2, ..., 3.0
    std::int64_t pool = 10000;
    int pool_replicates = 20;  // independent pools for the population-dynamics SE
    std::int64_t instances = 100;
    int perturbations = 20;
    std::string input;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<double> band_min;
    std::optional<double> band_max;
    std::int64_t dump_instance = 0;

    bool operator==(const ExperimentConfig&) const = default;
};

// JSON text form of a config and its inverse; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);
ExperimentConfig parse_config(std::string_view text);

std::vector<int> parse_depths(std::string_view literal);
std::vector<double> parse_grid(std::string_view literal);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitGuard = 3;

// Entry point shared by the treenet tool and the tests. args excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treenet::cli
