#pragma once

#include <string>
#include <vector>

#include "sst/null_models.hpp"
#include "sst/smooth_test.hpp"

namespace sst {

enum class Method { Sst, SingleLambda, Ks, Ad };

std::string method_tag(Method m);

struct StudyConfig {
    ScenarioSpec scenario;
    std::vector<double> theta_grid;  // empty -> 8 evenly spaced over the range
    Eigen::Index n = 50;
    Eigen::Index m = 2000;  // basis / bandwidth-grid sample size
    int b1 = 2000;
    int b2 = 1000;
    int repetitions = 500;
    double alpha = 0.05;
    std::vector<Method> methods = {Method::Sst};
    std::vector<double> bandwidths;  // empty -> quantile grid
    std::vector<int> cutoffs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    BandwidthGridSpec grid_spec;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string output_dir = ".";
    std::string overlay_csv;  // externally computed baseline curves, optional

    void validate() const;
    std::string to_json() const;
    static StudyConfig from_json(const std::string& text);
    static StudyConfig from_json_file(const std::string& path);
};

struct PowerRow {
    std::string method;
    double theta = 0.0;
    double rate = 0.0;
    double se = 0.0;  // sqrt(rate (1-rate) / R)
    int repetitions = 0;
};

struct PowerTable {
    std::vector<PowerRow> rows;
};

// Calibrates once at the scenario null, then for each theta tests R replicate
// datasets at level alpha with every requested method, sharing replicates
// across methods. Deterministic given the seed, independent of thread count.
PowerTable run_power_study(const StudyConfig& cfg);

// Power study with one curve per retained single-lambda setting plus the SST
// curve, all on shared replicates.
PowerTable run_robustness_study(const StudyConfig& cfg);

struct ReportPaths {
    std::string csv;
    std::string svg;
    std::string manifest;
};

// CSV of exact rates, a deterministic SVG line chart (one series per method),
// and a JSON run manifest that round-trips the config.
ReportPaths emit_reports(const PowerTable& table, const StudyConfig& cfg,
                         const std::string& dir);

// method,theta,rate rows appended as extra series (external baselines).
void append_overlay_csv(PowerTable& table, const std::string& path);

std::string power_table_csv(const PowerTable& table);

}  // namespace sst
