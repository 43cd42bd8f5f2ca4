#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sst/kernel_space.hpp"
#include "sst/rng.hpp"
#include "sst/smooth_test.hpp"

namespace sst {

enum class ScenarioFamily {
    NormalMean,     // (a) F0 = N(0,1), X = N(theta,1)
    NormalVar,      // (b) F0 = N(0,1), X = N(0, sd=theta)
    LogNormalMean,  // (c)
    LogNormalVar,   // (d)
    BetaSymmetry,   // (e) F0 = Beta(1,1), X = Beta(theta,theta)
    GammaShape,     // (f) F0 = Gamma(3, rate 2), X = Gamma(theta, rate 2)
    NormalMixture,  // (g) X = 0.5 N(-theta,1) + 0.5 N(theta,1)
    FatTails,       // (h) X = t(1/theta); theta = 0 is the exact N(0,1) null
    MvnMean,        // multivariate (a), d = 100 default
    MvnVar,         // multivariate (b), variance theta in coordinate 1
    Bootstrap,      // with-replacement resampling of a reference dataset
};

struct ScenarioSpec {
    ScenarioFamily family = ScenarioFamily::NormalMean;
    double theta = 0.0;
    int dimension = 1;  // 1 for univariate families, 100 default for mvn
    std::optional<Dataset> reference;  // bootstrap only

    // The spec at the scenario's null parameter.
    ScenarioSpec null_spec() const;
    double null_theta() const;
    // Inclusive parameter range studied for this family.
    std::pair<double, double> theta_range() const;
    bool univariate() const;
};

std::optional<ScenarioFamily> parse_family(const std::string& tag);
std::string family_tag(ScenarioFamily family);
std::vector<std::string> known_family_tags();

// n i.i.d. draws from the scenario at its current theta. Deterministic given
// the stream state. Warns (returns normally) on theta outside the documented
// range.
Dataset sample(const ScenarioSpec& spec, Eigen::Index n, Rng& rng);

// n uniform with-replacement draws of reference rows.
Dataset bootstrap_sample(const Dataset& reference, Eigen::Index n, Rng& rng);

// Dataset-valued sampler bound to the scenario's null.
NullSampler make_null_sampler(const ScenarioSpec& spec);

// Null CDF of the scenario's F0; univariate families only.
std::function<double(double)> null_cdf(const ScenarioSpec& spec);

struct TestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov against a fully specified CDF. Exact D_n via
// order statistics; p-value from the asymptotic Kolmogorov series with
// Stephens' finite-n correction, Monte Carlo below mc_threshold.
TestOutcome ks_statistic(const Dataset& data, const std::function<double(double)>& cdf,
                         int mc_threshold = 30, std::uint64_t mc_seed = 0x5e5);

// One-sample Anderson-Darling (all parameters known). Asymptotic p-value via
// the D'Agostino-Stephens approximation, Monte Carlo below mc_threshold.
TestOutcome ad_statistic(const Dataset& data, const std::function<double(double)>& cdf,
                         int mc_threshold = 30, std::uint64_t mc_seed = 0xad5);

}  // namespace sst
