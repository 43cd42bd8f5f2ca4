// Command-line surface for the spectral smooth test: end-to-end testing,
// power/robustness studies, MNIST density-ratio ranking, basis inspection.
//
// Exit codes: 0 ok, 1 usage or runtime error, 2 null rejected at --alpha.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "sst/diffusion_basis.hpp"
#include "sst/harness.hpp"
#include "sst/mnist_ingest.hpp"
#include "sst/null_models.hpp"
#include "sst/parallel.hpp"
#include "sst/smooth_test.hpp"

namespace {

using json = nlohmann::json;

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
    if (seed) return *seed;
    std::random_device rd;
    return (std::uint64_t(rd()) << 32) | rd();
}

sst::ScenarioSpec parse_null_spec(const std::string& tag) {
    std::string t = tag;
    if (t == "normal") t = "normal_mean";
    if (t == "lognormal") t = "lognormal_mean";
    auto fam = sst::parse_family(t);
    if (!fam) {
        std::string valid = "normal";
        for (const auto& k : sst::known_family_tags()) valid += ", " + k;
        throw sst::ConfigError("unknown null '" + tag + "'; valid: " + valid);
    }
    sst::ScenarioSpec spec;
    spec.family = *fam;
    return spec.null_spec();
}

json result_to_json(const sst::SstResult& result, std::uint64_t seed) {
    json j;
    j["t_sst"] = result.t_sst_observed;
    j["p_value"] = result.p_value;
    j["seed"] = seed;
    j["reporting_lambda"] = {{"bandwidth", result.reporting_lambda.bandwidth},
                             {"cutoff", result.reporting_lambda.cutoff}};
    j["density_ratio_theta"] = std::vector<double>(
        result.density_ratio_theta.data(),
        result.density_ratio_theta.data() + result.density_ratio_theta.size());
    json diags = json::array();
    for (const auto& d : result.diagnostics) {
        json e;
        e["bandwidth"] = d.lambda.bandwidth;
        e["cutoff"] = d.lambda.cutoff;
        e["t"] = d.t;
        e["t_star"] = d.t_star;
        e["p_hat"] = d.p_hat;
        e["theta"] = std::vector<double>(d.theta.data(), d.theta.data() + d.theta.size());
        diags.push_back(std::move(e));
    }
    j["per_lambda"] = std::move(diags);
    return j;
}

int cmd_test(const std::string& data_path, const std::string& null_tag,
             sst::SstConfig cfg, std::optional<double> alpha, const std::string& out_path) {
    sst::Dataset data = sst::read_csv_dataset(data_path);
    sst::ScenarioSpec null_spec = parse_null_spec(null_tag);
    sst::NullSampler sampler = sst::make_null_sampler(null_spec);
    sst::SstResult result = sst::run_sst(data, sampler, cfg);

    json j = result_to_json(result, cfg.seed);
    j["null"] = sst::family_tag(null_spec.family);
    j["n"] = data.rows();
    j["m"] = cfg.m;
    j["b1"] = cfg.b1;
    j["b2"] = cfg.b2;
    std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw sst::IoError("cannot open for writing: " + out_path);
        out << text << "\n";
    }
    if (alpha && result.p_value <= *alpha) return 2;
    return 0;
}

int cmd_study(const std::string& config_path, bool robustness,
              std::optional<std::uint64_t> seed_override,
              std::optional<unsigned> threads_override,
              const std::string& out_override) {
    sst::StudyConfig cfg = sst::StudyConfig::from_json_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (threads_override) cfg.threads = *threads_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    sst::PowerTable table =
        robustness ? sst::run_robustness_study(cfg) : sst::run_power_study(cfg);
    auto paths = sst::emit_reports(table, cfg, cfg.output_dir);
    std::cout << "wrote " << paths.csv << "\n"
              << "wrote " << paths.svg << "\n"
              << "wrote " << paths.manifest << "\n";
    return 0;
}

int cmd_rank(const std::string& train_images, const std::string& train_labels,
             const std::string& test_images, const std::string& test_labels, int digit,
             sst::RankConfig rank_cfg, bool raw_pixels, const std::string& out_dir) {
    if (digit < 0 || digit > 9) throw sst::UsageError("digit must be in 0..9");
    auto train = sst::load_labeled(train_images, train_labels, raw_pixels);
    auto test = sst::load_labeled(test_images, test_labels, raw_pixels);
    sst::Dataset train_d = sst::filter_digit(train, digit);
    sst::Dataset test_d = sst::filter_digit(test, digit);
    if (train_d.rows() == 0 || test_d.rows() == 0)
        throw sst::UsageError("no images with digit " + std::to_string(digit));

    auto ranking = sst::rank_by_density_ratio(train_d, test_d, rank_cfg);
    std::vector<int> labels(static_cast<std::size_t>(test_d.rows()), digit);
    std::filesystem::create_directories(out_dir);
    std::string base = out_dir + "/rank_digit" + std::to_string(digit);
    sst::write_ranking_csv(base + ".csv", ranking, labels);
    int side = static_cast<int>(std::lround(std::sqrt(double(test_d.cols()))));
    if (side * side == test_d.cols()) {
        sst::write_contact_sheet_pgm(base + "_sheet.pgm", test_d, ranking,
                                     std::min<int>(16, int(ranking.size())), side,
                                     raw_pixels);
        std::cout << "wrote " << base << "_sheet.pgm\n";
    }
    std::cout << "wrote " << base << ".csv (pixels " << (raw_pixels ? "raw" : "scaled")
              << ", m=" << rank_cfg.m << ", I=" << rank_cfg.cutoff
              << ", eps=" << rank_cfg.bandwidth << ", seed=" << rank_cfg.seed << ")\n";
    return 0;
}

int cmd_basis_build(const std::string& data_path, double eps, int max_index,
                    const std::string& out_path) {
    sst::Dataset pts = sst::read_csv_dataset(data_path);
    auto basis = sst::DiffusionBasis::build(pts, sst::KernelConfig{eps}, max_index);
    basis.save_file(out_path);
    std::cout << "wrote " << out_path << " (m=" << basis.size()
              << ", eps=" << eps << ", max_index=" << max_index << ")\n";
    return 0;
}

int cmd_basis_inspect(const std::string& path) {
    sst::DiffusionBasis basis = sst::DiffusionBasis::load_file(path);
    json j;
    j["m"] = basis.size();
    j["dimension"] = basis.training_points().cols();
    j["bandwidth"] = basis.kernel().bandwidth;
    j["max_index"] = basis.max_index();
    j["degree_mean"] = basis.degree_mean();
    j["eigenvalues"] = std::vector<double>(
        basis.eigenvalues().data(), basis.eigenvalues().data() + basis.eigenvalues().size());
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral smooth test for goodness-of-fit"};
    app.require_subcommand(1);

    // test
    auto* test = app.add_subcommand("test", "Run the SST on a dataset against a null");
    std::string data_path, null_tag = "normal", out_path;
    sst::SstConfig sst_cfg;
    std::optional<std::uint64_t> seed_opt;
    std::optional<double> alpha_opt;
    std::vector<double> bandwidths;
    std::vector<int> cutoffs;
    unsigned threads = sst::default_threads();
    test->add_option("--data", data_path, "Dataset CSV, one point per row")
        ->required()
        ->check(CLI::ExistingFile)
        ->envname("SST_DATA");
    test->add_option("--null", null_tag, "Null model tag (normal, beta_symmetry, ...)")
        ->envname("SST_NULL");
    test->add_option("--bandwidths", bandwidths, "Explicit bandwidth list")
        ->envname("SST_BANDWIDTHS");
    test->add_option("--cutoffs", cutoffs, "Series cutoffs")->envname("SST_CUTOFFS");
    test->add_option("--m", sst_cfg.m, "Basis sample size")->envname("SST_M");
    test->add_option("--b1", sst_cfg.b1, "Stage-1 Monte Carlo replicates")->envname("SST_B1");
    test->add_option("--b2", sst_cfg.b2, "Stage-2 Monte Carlo replicates")->envname("SST_B2");
    test->add_option("--seed", seed_opt, "RNG seed (random if omitted)")->envname("SST_SEED");
    test->add_option("--alpha", alpha_opt, "Reject level; exit code 2 on rejection")
        ->envname("SST_ALPHA");
    test->add_option("--threads", threads, "Worker pool size")->envname("SST_THREADS");
    test->add_option("--out", out_path, "Write the JSON result here too")->envname("SST_OUT");

    // power / robustness
    auto* power = app.add_subcommand("power", "Power study from a JSON config");
    auto* robust = app.add_subcommand("robustness",
                                      "Power study with per-lambda curves");
    std::string config_path, study_out;
    std::optional<std::uint64_t> study_seed;
    std::optional<unsigned> study_threads;
    for (auto* cmd : {power, robust}) {
        cmd->add_option("config", config_path, "StudyConfig JSON path")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--seed", study_seed, "Override config seed")->envname("SST_SEED");
        cmd->add_option("--threads", study_threads, "Override config threads")
            ->envname("SST_THREADS");
        cmd->add_option("--out", study_out, "Override output directory")->envname("SST_OUT");
    }

    // rank
    auto* rank = app.add_subcommand("rank", "Density-ratio ranking of MNIST test images");
    std::string tri, trl, tei, tel, rank_out = ".";
    int digit = 7;
    sst::RankConfig rank_cfg;
    bool raw_pixels = true;
    std::optional<std::uint64_t> rank_seed;
    rank->add_option("--train-images", tri)->required()->check(CLI::ExistingFile);
    rank->add_option("--train-labels", trl)->required()->check(CLI::ExistingFile);
    rank->add_option("--test-images", tei)->required()->check(CLI::ExistingFile);
    rank->add_option("--test-labels", tel)->required()->check(CLI::ExistingFile);
    rank->add_option("--digit", digit, "Digit to condition on");
    rank->add_option("--cutoffs,--I", rank_cfg.cutoff, "Series cutoff I");
    rank->add_option("--bandwidths,--eps", rank_cfg.bandwidth, "Kernel bandwidth");
    rank->add_option("--m", rank_cfg.m, "Bootstrap basis sample size");
    rank->add_option("--seed", rank_seed, "RNG seed")->envname("SST_SEED");
    rank->add_flag("--raw-pixels,!--scaled-pixels", raw_pixels,
                   "Raw 0..255 pixels (default) vs [0,1] scaling");
    rank->add_option("--out", rank_out, "Output directory")->envname("SST_OUT");

    // basis inspect
    auto* basis = app.add_subcommand("basis", "Basis artifact utilities");
    basis->require_subcommand(1);
    auto* inspect = basis->add_subcommand("inspect", "Print basis metadata as JSON");
    std::string basis_path;
    inspect->add_option("path", basis_path, "Basis artifact")
        ->required()
        ->check(CLI::ExistingFile);
    auto* build = basis->add_subcommand("build", "Build a basis artifact from a CSV");
    std::string build_data, build_out = "basis.sst";
    double build_eps = 1.0;
    int build_idx = 10;
    build->add_option("--data", build_data, "Training sample CSV")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("--eps,--bandwidths", build_eps, "Kernel bandwidth")->required();
    build->add_option("--I,--cutoffs", build_idx, "Largest eigenfunction index");
    build->add_option("--out", build_out, "Artifact path")->envname("SST_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize all usage errors to exit code 1 (0 stays 0 for --help)
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*test) {
            sst_cfg.seed = resolve_seed(seed_opt);
            sst_cfg.threads = threads;
            sst_cfg.bandwidths = bandwidths;
            if (!cutoffs.empty()) sst_cfg.cutoffs = cutoffs;
            return cmd_test(data_path, null_tag, sst_cfg, alpha_opt, out_path);
        }
        if (*power || *robust)
            return cmd_study(config_path, robust->parsed(), study_seed, study_threads,
                             study_out);
        if (*rank) {
            rank_cfg.seed = resolve_seed(rank_seed);
            return cmd_rank(tri, trl, tei, tel, digit, rank_cfg, raw_pixels, rank_out);
        }
        if (*build) return cmd_basis_build(build_data, build_eps, build_idx, build_out);
        if (*inspect) return cmd_basis_inspect(basis_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
