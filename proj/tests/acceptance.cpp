// Seeded end-to-end acceptance runs. Every run goes through the CLI entry
// point, writes its artifacts, and the checks below read those files back.
// The whole suite runs twice (8 workers, then 1) and the artifact trees are
// compared byte for byte.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "treenet/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Row = std::map<std::string, std::string>;

struct Run {
    std::string dir;
    std::vector<std::string> args;
};

// Every artifact-producing invocation of the suite, in execution order.
std::vector<Run> suite_runs() {
    std::vector<Run> runs = {
        {"c1", {"oracle-check", "--model", "reg:2", "--dist", "unif:0.5,1.5", "--n", "2..9", "--instances", "500",
                "--seed", "1"}},
        {"c2", {"flows", "--model", "reg:2", "--dist", "unif:0.5,1.5", "--n", "8", "--instances", "200",
                "--perturbations", "20", "--seed", "1"}},
        {"c4", {"sweep", "--model", "reg:2", "--dist", "twopoint:0.5,1.5", "--n", "2..18", "--reps",
                "20000,15..18:5000", "--seed", "7", "--format", "json"}},
        {"c4", {"fit", "--input", "c4/sweep.json", "--dist", "twopoint:0.5,1.5", "--band-min", "8", "--band-max",
                "18"}},
        {"c5", {"sweep", "--model", "reg:2", "--dist", "twopoint:0.5,1.5", "--n", "4,6,8,11,16", "--reps",
                "40000,16:10000", "--seed", "9", "--format", "json"}},
        {"c5", {"constants", "--dist", "twopoint:0.5,1.5", "--n", "4,6,8,11,16"}},
        {"c5", {"flows", "--model", "reg:2", "--dist", "twopoint:0.5,1.5", "--n", "8", "--instances", "2000",
                "--perturbations", "0", "--seed", "9"}},
        {"c6", {"sample", "--model", "reg:2", "--dist", "twopoint:0.5,1.5", "--n", "10", "--reps", "100000",
                "--seed", "11"}},
        {"c7", {"rde", "--dist", "twopoint:0.5,1.5", "--pool", "100000", "--pool-replicates", "20", "--n", "12",
                "--seed", "13"}},
        {"c7", {"sweep", "--model", "reg:2", "--dist", "twopoint:0.5,1.5", "--n", "4,8,12", "--reps", "100000",
                "--seed", "13", "--format", "json"}},
        {"c8b", {"gw", "--model", "gw:1:0.5,2:0.5", "--dist", "const:1", "--n", "14", "--instances", "2000",
                 "--seed", "17"}},
    };
    for (int n = 1; n <= 14; ++n) {
        runs.push_back({"c8a/n" + std::to_string(n),
                        {"gw", "--model", "gw:2:1", "--dist", "const:1", "--n", std::to_string(n), "--instances", "2",
                         "--seed", "17"}});
    }
    return runs;
}

std::map<std::string, double> run_suite(const fs::path& root, int workers) {
    fs::create_directories(root);
    const fs::path previous = fs::current_path();
    fs::current_path(root);
    std::map<std::string, double> seconds;
    for (const Run& run : suite_runs()) {
        std::vector<std::string> args = run.args;
        args.insert(args.end(), {"--out", run.dir, "--workers", std::to_string(workers)});
        std::ostringstream out, err;
        const auto start = std::chrono::steady_clock::now();
        const int code = treenet::cli::run(args, out, err);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        seconds[run.dir + " " + run.args[0]] += elapsed;
        if (code != 0) {
            std::cerr << "run failed (" << code << "): " << run.args[0] << " in " << run.dir << ": " << err.str();
        }
    }
    fs::current_path(previous);
    return seconds;
}

std::vector<Row> read_csv(const fs::path& path) {
    std::ifstream in(path);
    std::vector<Row> rows;
    std::vector<std::string> header;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (header.empty()) {
            header = fields;
            continue;
        }
        Row row;
        for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) row[header[i]] = fields[i];
        rows.push_back(row);
    }
    return rows;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return json::object();
    try {
        return json::parse(in);
    } catch (const json::exception&) {
        return json::object();
    }
}

double num(const Row& row, const std::string& key) {
    const auto it = row.find(key);
    return it == row.end() ? NAN : std::stod(it->second);
}

double jnum(const json& j, const char* key) {
    return j.contains(key) && j.at(key).is_number() ? j.at(key).get<double>() : NAN;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// Lines are buffered and printed in criterion order at the end, since the
// inequality sweep (3) collects slacks from the later suites.
std::map<int, std::pair<bool, std::string>> results;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    results[id] = {pass, "criterion " + std::to_string(id) + " (" + name + "): " + detail};
}

// Minimum over every deterministic-inequality slack found in the artifacts.
struct SlackLedger {
    double min = INFINITY;
    std::string where;
    void add(double slack, const std::string& source) {
        if (std::isnan(slack)) {
            min = -INFINITY;
            where = source + " (missing)";
        } else if (slack < min) {
            min = slack;
            where = source;
        }
    }
};

bool byte_equal(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    return std::equal(std::istreambuf_iterator<char>(fa), std::istreambuf_iterator<char>(),
                      std::istreambuf_iterator<char>(fb), std::istreambuf_iterator<char>());
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "treenet_acceptance";
    fs::remove_all(root);
    const fs::path a = fs::absolute(root / "workers8"), b = fs::absolute(root / "workers1");
    const auto timing = run_suite(a, 8);
    SlackLedger slack;

    // 1. Oracle equivalence.
    {
        const json s = read_json(a / "c1" / "oracle_summary.json");
        const auto rows = read_csv(a / "c1" / "oracle.csv");
        double fold_vs_flow = 0.0;
        for (const Row& r : rows) {
            fold_vs_flow = std::max(fold_vs_flow, std::abs(num(r, "R_series_parallel") - num(r, "R_flow")) /
                                                      num(r, "R_oracle"));
        }
        const double gap = std::max(jnum(s, "max_resistance_gap"), fold_vs_flow);
        const double secs = timing.at("c1 oracle-check");
        report(1, "oracle equivalence", rows.size() == 500 && gap <= 1e-9 && secs < 30.0,
               std::to_string(rows.size()) + " instances, max relative gap " + fmt(gap) + " (<= 1e-9), " +
                   fmt(secs) + " s (< 30 s)");
    }

    // 2. Thomson optimality.
    {
        const json s = read_json(a / "c2" / "flows_summary.json");
        const double gap = jnum(s, "max_energy_rel_gap");
        const double pert = jnum(s, "min_perturbation_slack");
        const auto rows = read_csv(a / "c2" / "flows.csv");
        report(2, "Thomson optimality", rows.size() == 200 && gap <= 1e-9 && pert >= -1e-12,
               "max |E - R|/R " + fmt(gap) + " (<= 1e-9), min perturbed E - R " + fmt(pert) + " (>= -1e-12)");
        slack.add(jnum(s, "min_current_bound_margin"), "c2 current bound");
        slack.add(jnum(s, "min_B4_minus_S4"), "c2 S4 <= B4");
        slack.add(jnum(s, "min_envelope_slack"), "c2 envelope");
        for (const Row& r : read_csv(a / "c2" / "flow_dump.csv")) slack.add(num(r, "margin"), "c2 flow dump");
    }

    // 4. Expectation fit.
    const json sweep4 = read_json(a / "c4" / "sweep.json");
    {
        const json fit = read_json(a / "c4" / "fit.json");
        const double alpha = fit.contains("coefficients") ? jnum(fit["coefficients"], "alpha") : NAN;
        const double beta = fit.contains("coefficients") ? jnum(fit["coefficients"], "beta") : NAN;
        const double band =
            fit.contains("constrained_residual_band") ? jnum(fit["constrained_residual_band"], "range") : NAN;
        const double secs = timing.at("c4 sweep");
        report(4, "expectation asymptotics", alpha >= 0.98 && alpha <= 1.02 && beta >= -0.45 && beta <= -0.10 &&
                                                 band <= 0.5,
               "alpha " + fmt(alpha) + " in [0.98, 1.02], beta " + fmt(beta) + " in [-0.45, -0.10], band range " +
                   fmt(band) + " (<= 0.5) over n in [8, 18]; sweep " + fmt(secs) + " s");
        slack.add(jnum(sweep4, "min_envelope_slack"), "c4 envelope");
    }

    // 5. Variance decay and bounded variance.
    const json sweep5 = read_json(a / "c5" / "sweep.json");
    {
        const auto rows = read_csv(a / "c5" / "constants.csv");
        std::map<int, double> bound;
        for (const Row& r : rows) bound[static_cast<int>(num(r, "n"))] = num(r, "variance_bound");
        double sx = 0, sy = 0, sxx = 0, sxy = 0, k = 0;
        bool under = true;
        std::map<int, json> by_n;
        for (const json& r : sweep5.value("reports", json::array())) {
            const int n = r["n"].get<int>();
            const double v = r["conductance"]["variance"].get<double>();
            by_n[n] = r;
            const double x = std::log(n), y = std::log(v);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++k;
            under = under && bound.count(n) && v <= bound[n];
        }
        const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        bool bounded = false;
        std::string bounded_detail = "missing n = 8 or 16";
        if (by_n.count(8) && by_n.count(16)) {
            const double v8 = by_n[8]["resistance"]["variance"].get<double>();
            const double v16 = by_n[16]["resistance"]["variance"].get<double>();
            const double se8 = by_n[8]["resistance"]["se_variance"].get<double>();
            const double se16 = by_n[16]["resistance"]["se_variance"].get<double>();
            const double allowance = 2.0 * v8 + 3.0 * std::sqrt(se16 * se16 + 4.0 * se8 * se8);
            bounded = v16 <= allowance;
            bounded_detail = "Var R16 " + fmt(v16) + " <= " + fmt(allowance);
        }
        // Efron-Stein diagnostic at n = 8 from the flows run on the same law.
        const json fs5 = read_json(a / "c5" / "flows_summary.json");
        const json es = fs5.value("efron_stein", json::object());
        const double es_var = jnum(es, "variance_R"), es_se = jnum(es, "se_variance_R");
        const double es_bound = jnum(es, "bound_scaled");
        const bool es_ok = es_var <= es_bound + 3.0 * es_se;
        report(5, "variance decay", k == 5 && slope >= -4.8 && slope <= -3.2 && under && bounded && es_ok,
               "slope " + fmt(slope) + " in [-4.8, -3.2], every Var C_n <= bound: " + (under ? "yes" : "no") + ", " +
                   bounded_detail + ", Efron-Stein Var R8 " + fmt(es_var) + " <= " + fmt(es_bound) + " + 3 SE");
        slack.add(jnum(sweep5, "min_envelope_slack"), "c5 envelope");
        slack.add(jnum(fs5, "min_current_bound_margin"), "c5 current bound");
        slack.add(jnum(fs5, "min_B4_minus_S4"), "c5 S4 <= B4");
        slack.add(jnum(fs5, "min_envelope_slack"), "c5 flows envelope");
    }

    // 6. Sub-Gaussian tails and fourth-moment boundedness.
    {
        const auto tails = read_csv(a / "c6" / "tails.csv");
        bool below = !tails.empty();
        double worst = -INFINITY;
        for (const Row& r : tails) {
            const double excess = num(r, "freq") - num(r, "bound");
            worst = std::max(worst, excess);
            below = below && excess <= 0.0;
        }
        const auto samples = read_csv(a / "c6" / "samples.csv");
        std::vector<double> values;
        for (const Row& r : samples) {
            const double R = num(r, "R");
            values.push_back(R);
            slack.add(std::min(R - 0.5 * 10, 1.5 * 10 - R) / 10.0, "c6 envelope");
        }
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (const double v : values) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        std::size_t beyond = 0;
        for (const double v : values) beyond += std::abs(v - mean) > 3.0 * sd;
        const double tail3 = static_cast<double>(beyond) / static_cast<double>(values.size());

        double ratio = 1.0;
        for (const json* sweep : {&sweep4, &sweep5}) {
            double lo = INFINITY, hi = 0.0;
            for (const json& r : sweep->value("reports", json::array())) {
                const double m4 = r["resistance"]["m4"].get<double>();
                lo = std::min(lo, m4);
                hi = std::max(hi, m4);
            }
            ratio = std::max(ratio, hi / lo);
        }
        report(6, "sub-Gaussian tails", values.size() == 100000 && below && tail3 <= 0.01 && ratio <= 4.0,
               "max (empirical - bound) " + fmt(worst) + " (<= 0), tail at 3 sd " + fmt(tail3) +
                   " (<= 0.01), max/min fourth central moment " + fmt(ratio) + " (<= 4)");
    }

    // 7. Population dynamics against the exact sampler.
    {
        std::map<int, Row> pool;
        for (const Row& r : read_csv(a / "c7" / "rde.csv")) {
            pool[static_cast<int>(num(r, "level"))] = r;
            slack.add(num(r, "envelope_slack"), "c7 pool envelope");
        }
        const json exact = read_json(a / "c7" / "sweep.json");
        slack.add(jnum(exact, "min_envelope_slack"), "c7 envelope");
        bool ok = true;
        int checked = 0;
        std::string detail;
        for (const json& r : exact.value("reports", json::array())) {
            const int n = r["n"].get<int>();
            if (!pool.count(n)) continue;
            const double me = r["conductance"]["mean"].get<double>();
            const double se = r["conductance"]["se_mean"].get<double>();
            const double mp = num(pool[n], "mean_C"), sp = num(pool[n], "se_C_replicates");
            const double within = num(pool[n], "se_C");
            const double z = std::abs(mp - me) / std::sqrt(se * se + sp * sp);
            const double z_within = std::abs(mp - me) / std::sqrt(se * se + within * within);
            ok = ok && z <= 3.0;
            ++checked;
            detail += (detail.empty() ? "" : ", ") + std::string("level ") + std::to_string(n) + ": " + fmt(z) +
                      " SE (within-pool SE alone: " + fmt(z_within) + ")";
        }
        report(7, "population dynamics", ok && checked == 3, detail + " (each <= 3)");
    }

    // 8. Galton-Watson trees.
    {
        bool exact = true;
        for (int n = 1; n <= 14; ++n) {
            const fs::path dir = a / "c8a" / ("n" + std::to_string(n));
            const auto rows = read_csv(dir / "gw.csv");
            exact = exact && rows.size() == 2;
            for (const Row& r : rows) exact = exact && r.at("R") == std::to_string(n + 1);
            const json s = read_json(dir / "gw_summary.json");
            slack.add(jnum(s, "min_shorting_slack"), "c8a shorting");
        }
        const json s = read_json(a / "c8b" / "gw_summary.json");
        slack.add(jnum(s, "min_shorting_slack"), "c8b shorting");
        const double corr = jnum(s, "correlation_R_over_n_vs_inverse_W");
        const double med = jnum(s, "median_R_over_n_times_W");
        const double diff = jnum(s, "nC_relative_difference_B1_1_vs_2");
        report(8, "Galton-Watson", exact && corr >= 0.9 && diff >= 0.10,
               std::string("(a) R = n + 1 exactly for n = 1..14: ") + (exact ? "yes" : "no") + "; (b) corr " +
                   fmt(corr) + " (>= 0.9), |median(R/n W) - 1| = " + fmt(std::abs(med - 1.0)) +
                   " (reported); (c) relative gap of n C_n means " + fmt(diff) + " (>= 0.10)");
    }

    // 3. Deterministic inequalities, gathered from every suite above.
    report(3, "deterministic inequalities", slack.min >= -1e-12,
           "min slack " + fmt(slack.min) + " at " + slack.where + " (>= -1e-12)");

    // 9. Reproducibility.
    {
        run_suite(b, 1);
        std::size_t files = 0, mismatched = 0;
        std::string first;
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file()) continue;
            const fs::path rel = fs::relative(entry.path(), a);
            ++files;
            if (!byte_equal(entry.path(), b / rel)) {
                ++mismatched;
                if (first.empty()) first = rel.string();
            }
        }
        report(9, "reproducibility", files > 0 && mismatched == 0,
               std::to_string(files) + " artifact files compared between 8 and 1 workers, " +
                   std::to_string(mismatched) + " differ" + (first.empty() ? "" : " (first: " + first + ")"));
    }

    int failures = 0;
    for (const auto& [id, result] : results) {
        std::cout << (result.first ? "PASS  " : "FAIL  ") << result.second << '\n';
        failures += result.first ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
