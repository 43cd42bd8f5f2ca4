#include "sst/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sst/parallel.hpp"

namespace sst {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string lambda_method_tag(const LambdaSetting& ls) {
    return "lambda_eps" + fmt(ls.bandwidth) + "_I" + std::to_string(ls.cutoff);
}

}  // namespace

std::string method_tag(Method m) {
    switch (m) {
        case Method::Sst: return "sst";
        case Method::SingleLambda: return "single_lambda";
        case Method::Ks: return "ks";
        case Method::Ad: return "ad";
    }
    return "?";
}

void StudyConfig::validate() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (n < 1 || m < 2) throw ConfigError("need n >= 1 and m >= 2");
    bool wants_baseline =
        std::find(methods.begin(), methods.end(), Method::Ks) != methods.end() ||
        std::find(methods.begin(), methods.end(), Method::Ad) != methods.end();
    if (wants_baseline && !scenario.univariate())
        throw ConfigError("KS/AD baselines are univariate only");
}

namespace {

std::vector<double> effective_theta_grid(const StudyConfig& cfg) {
    if (!cfg.theta_grid.empty()) return cfg.theta_grid;
    auto [lo, hi] = cfg.scenario.theta_range();
    std::vector<double> grid(8);
    for (int i = 0; i < 8; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / 7.0;
    return grid;
}

struct CalibratedScenario {
    BasisSet bases;
    NullCalibration cal;
    std::vector<LambdaSetting> grid;
};

CalibratedScenario calibrate_scenario(const StudyConfig& cfg) {
    NullSampler sampler = make_null_sampler(cfg.scenario);
    Rng basis_rng = make_stream(cfg.seed, 0, 0);
    Dataset training = sampler(cfg.m, basis_rng);

    std::vector<KernelConfig> bandwidths;
    if (cfg.bandwidths.empty()) {
        bandwidths = bandwidth_grid(training, cfg.grid_spec);
    } else {
        for (double e : cfg.bandwidths) bandwidths.push_back(KernelConfig{e});
    }
    CalibratedScenario cs;
    cs.grid = lambda_grid(bandwidths, cfg.cutoffs);
    cs.bases = build_bases(training, cs.grid);
    cs.cal = calibrate(sampler, cs.bases, cs.grid, cfg.n, cfg.b1, cfg.b2, cfg.seed,
                       cfg.threads);
    return cs;
}

PowerTable run_study(const StudyConfig& cfg, bool per_lambda_curves) {
    cfg.validate();
    auto thetas = effective_theta_grid(cfg);
    if (thetas.empty()) throw ConfigError("empty theta grid");

    const bool want_sst =
        per_lambda_curves ||
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Sst) != cfg.methods.end();
    const bool want_ks =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Ks) != cfg.methods.end();
    const bool want_ad =
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::Ad) != cfg.methods.end();

    CalibratedScenario cs;
    if (want_sst) cs = calibrate_scenario(cfg);
    const std::size_t L = cs.cal.per_lambda.size();
    std::function<double(double)> cdf;
    if (want_ks || want_ad) cdf = null_cdf(cfg.scenario);

    const auto R = static_cast<std::size_t>(cfg.repetitions);
    PowerTable table;
    // per-lambda settings reduced to the retained grid for the single-lambda curves
    std::vector<LambdaSetting> retained;
    for (const auto& pl : cs.cal.per_lambda) retained.push_back(pl.lambda);

    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        ScenarioSpec alt = cfg.scenario;
        alt.theta = thetas[ti];

        std::vector<std::uint8_t> rej_sst(R, 0), rej_ks(R, 0), rej_ad(R, 0);
        std::vector<std::vector<std::uint8_t>> rej_lambda;
        if (per_lambda_curves)
            rej_lambda.assign(L, std::vector<std::uint8_t>(R, 0));

        parallel_for(R, cfg.threads, [&](std::size_t r) {
            Rng rng = make_stream(cfg.seed, 0x100 + ti, r);
            Dataset data = sample(alt, cfg.n, rng);

            if (want_sst) {
                std::vector<double> t_all = t_lambda_all(cs.bases, retained, data);
                std::vector<double> t_star(L), p_hat(L);
                for (std::size_t l = 0; l < L; ++l) {
                    const auto& pl = cs.cal.per_lambda[l];
                    t_star[l] = standardize(t_all[l], pl.e0, pl.v0);
                    p_hat[l] = mc_p_value(t_all[l], pl.null_sample);
                    if (per_lambda_curves && p_hat[l] <= cfg.alpha) rej_lambda[l][r] = 1;
                }
                double p = mc_p_value(t_sst(t_star, p_hat), cs.cal.sst_null_sample);
                if (p <= cfg.alpha) rej_sst[r] = 1;
            }
            if (want_ks && ks_statistic(data, cdf).p_value <= cfg.alpha) rej_ks[r] = 1;
            if (want_ad && ad_statistic(data, cdf).p_value <= cfg.alpha) rej_ad[r] = 1;
        });

        auto add_row = [&](const std::string& tag, const std::vector<std::uint8_t>& rej) {
            double count = 0.0;
            for (auto b : rej) count += b;
            PowerRow row;
            row.method = tag;
            row.theta = thetas[ti];
            row.rate = count / static_cast<double>(R);
            row.se = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(R));
            row.repetitions = cfg.repetitions;
            table.rows.push_back(std::move(row));
        };
        if (want_sst) add_row("sst", rej_sst);
        if (per_lambda_curves)
            for (std::size_t l = 0; l < L; ++l)
                add_row(lambda_method_tag(retained[l]), rej_lambda[l]);
        if (want_ks) add_row("ks", rej_ks);
        if (want_ad) add_row("ad", rej_ad);
    }

    if (!cfg.overlay_csv.empty()) append_overlay_csv(table, cfg.overlay_csv);
    return table;
}

}  // namespace

PowerTable run_power_study(const StudyConfig& cfg) { return run_study(cfg, false); }

PowerTable run_robustness_study(const StudyConfig& cfg) { return run_study(cfg, true); }

void append_overlay_csv(PowerTable& table, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open overlay CSV: " + path);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string method, theta, rate;
        if (!std::getline(ss, method, ',') || !std::getline(ss, theta, ',') ||
            !std::getline(ss, rate, ','))
            throw ParseError("overlay CSV needs method,theta,rate columns", 0);
        if (first && method == "method") {  // optional header
            first = false;
            continue;
        }
        first = false;
        PowerRow row;
        row.method = method;
        row.theta = std::stod(theta);
        row.rate = std::stod(rate);
        row.se = 0.0;
        row.repetitions = 0;
        table.rows.push_back(std::move(row));
    }
}

std::string power_table_csv(const PowerTable& table) {
    std::ostringstream out;
    out << "method,theta,rate,se,repetitions\n";
    for (const auto& r : table.rows)
        out << r.method << ',' << fmt(r.theta) << ',' << fmt(r.rate) << ',' << fmt(r.se)
            << ',' << r.repetitions << '\n';
    return out.str();
}

namespace {

std::string render_svg(const PowerTable& table) {
    // series grouped by method in first-seen order
    std::vector<std::string> methods;
    for (const auto& r : table.rows)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);

    double tmin = 1e300, tmax = -1e300;
    for (const auto& r : table.rows) {
        tmin = std::min(tmin, r.theta);
        tmax = std::max(tmax, r.theta);
    }
    if (tmax <= tmin) tmax = tmin + 1.0;

    const int W = 640, H = 480, ML = 60, MR = 20, MT = 20, MB = 50;
    auto px = [&](double th) {
        return ML + (W - ML - MR) * (th - tmin) / (tmax - tmin);
    };
    auto py = [&](double rate) { return MT + (H - MT - MB) * (1.0 - rate); };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<line x1=\"" << ML << "\" y1=\"" << py(0) << "\" x2=\"" << W - MR << "\" y2=\""
      << py(0) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << ML << "\" y1=\"" << py(0) << "\" x2=\"" << ML << "\" y2=\""
      << py(1) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
      << "\" text-anchor=\"middle\" font-size=\"14\">theta</text>\n";
    s << "<text x=\"16\" y=\"" << (H / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
      << (H / 2) << ")\">rejection rate</text>\n";

    int mi = 0;
    for (const auto& method : methods) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : table.rows)
            if (r.method == method) pts.emplace_back(r.theta, r.rate);
        std::stable_sort(pts.begin(), pts.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const char* color = palette[mi % 10];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [th, rate] : pts) s << fmt(px(th)) << ',' << fmt(py(rate)) << ' ';
        s << "\"/>\n";
        for (const auto& [th, rate] : pts)
            s << "<circle cx=\"" << fmt(px(th)) << "\" cy=\"" << fmt(py(rate))
              << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        s << "<text x=\"" << (ML + 8) << "\" y=\"" << (MT + 16 + 16 * mi)
          << "\" font-size=\"12\" fill=\"" << color << "\">" << method << "</text>\n";
        ++mi;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace

std::string StudyConfig::to_json() const {
    json j;
    j["scenario"] = family_tag(scenario.family);
    j["theta"] = scenario.theta;
    j["dimension"] = scenario.dimension;
    j["theta_grid"] = theta_grid;
    j["n"] = n;
    j["m"] = m;
    j["b1"] = b1;
    j["b2"] = b2;
    j["repetitions"] = repetitions;
    j["alpha"] = alpha;
    std::vector<std::string> ms;
    for (auto m_ : methods) ms.push_back(method_tag(m_));
    j["methods"] = ms;
    j["bandwidths"] = bandwidths;
    j["cutoffs"] = cutoffs;
    j["literal_low_quantile"] = grid_spec.literal_low_quantile;
    j["seed"] = seed;
    j["threads"] = threads;
    j["output_dir"] = output_dir;
    j["overlay_csv"] = overlay_csv;
    return j.dump(2);
}

StudyConfig StudyConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    StudyConfig cfg;
    std::string tag = j.at("scenario").get<std::string>();
    auto fam = parse_family(tag);
    if (!fam) {
        std::string valid;
        for (const auto& t : known_family_tags()) valid += t + " ";
        throw ConfigError("unknown scenario tag '" + tag + "'; valid tags: " + valid);
    }
    cfg.scenario.family = *fam;
    cfg.scenario.theta = j.value("theta", cfg.scenario.null_theta());
    cfg.scenario.dimension = j.value("dimension", cfg.scenario.univariate() ? 1 : 100);
    cfg.theta_grid = j.value("theta_grid", std::vector<double>{});
    cfg.n = j.value("n", 50);
    cfg.m = j.value("m", 2000);
    cfg.b1 = j.value("b1", 2000);
    cfg.b2 = j.value("b2", 1000);
    cfg.repetitions = j.value("repetitions", 500);
    cfg.alpha = j.value("alpha", 0.05);
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& mtag : j["methods"]) {
            std::string t = mtag.get<std::string>();
            if (t == "sst") cfg.methods.push_back(Method::Sst);
            else if (t == "single_lambda") cfg.methods.push_back(Method::SingleLambda);
            else if (t == "ks") cfg.methods.push_back(Method::Ks);
            else if (t == "ad") cfg.methods.push_back(Method::Ad);
            else throw ConfigError("unknown method '" + t + "' (sst, single_lambda, ks, ad)");
        }
    }
    cfg.bandwidths = j.value("bandwidths", std::vector<double>{});
    cfg.cutoffs = j.value("cutoffs", cfg.cutoffs);
    cfg.grid_spec.literal_low_quantile = j.value("literal_low_quantile", false);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.threads = j.value("threads", 1u);
    cfg.output_dir = j.value("output_dir", std::string("."));
    cfg.overlay_csv = j.value("overlay_csv", std::string{});
    return cfg;
}

StudyConfig StudyConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

ReportPaths emit_reports(const PowerTable& table, const StudyConfig& cfg,
                         const std::string& dir) {
    if (table.rows.empty()) throw UsageError("emit_reports: empty power table");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::string base = dir + "/" + family_tag(cfg.scenario.family);

    ReportPaths paths;
    paths.csv = base + "_power.csv";
    paths.svg = base + "_power.svg";
    paths.manifest = base + "_manifest.json";

    auto write = [](const std::string& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << content;
    };
    write(paths.csv, power_table_csv(table));
    write(paths.svg, render_svg(table));
    write(paths.manifest, cfg.to_json() + "\n");
    return paths;
}

}  // namespace sst
