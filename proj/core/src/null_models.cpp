#include "sst/null_models.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>

namespace sst {

namespace {

struct FamilyInfo {
    const char* tag;
    double null_theta;
    double lo, hi;
    bool univariate;
};

const std::map<ScenarioFamily, FamilyInfo>& family_table() {
    static const std::map<ScenarioFamily, FamilyInfo> table = {
        {ScenarioFamily::NormalMean, {"normal_mean", 0.0, 0.0, 0.7, true}},
        {ScenarioFamily::NormalVar, {"normal_var", 1.0, 1.0, 2.5, true}},
        {ScenarioFamily::LogNormalMean, {"lognormal_mean", 0.0, 0.0, 1.0, true}},
        {ScenarioFamily::LogNormalVar, {"lognormal_var", 1.0, 1.0, 2.5, true}},
        {ScenarioFamily::BetaSymmetry, {"beta_symmetry", 1.0, 1.0, 5.0, true}},
        {ScenarioFamily::GammaShape, {"gamma_shape", 3.0, 3.0, 4.5, true}},
        {ScenarioFamily::NormalMixture, {"normal_mixture", 0.0, 0.0, 2.0, true}},
        {ScenarioFamily::FatTails, {"fat_tails", 0.0, 0.0, 1.0, true}},
        {ScenarioFamily::MvnMean, {"mvn_mean", 0.0, 0.0, 1.5, false}},
        {ScenarioFamily::MvnVar, {"mvn_var", 1.0, 1.0, 20.0, false}},
        {ScenarioFamily::Bootstrap, {"bootstrap", 0.0, 0.0, 0.0, false}},
    };
    return table;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Regularized lower incomplete gamma P(3, y) in closed form (integer shape).
double gamma3_cdf_rate2(double x) {
    if (x <= 0.0) return 0.0;
    double y = 2.0 * x;
    return 1.0 - std::exp(-y) * (1.0 + y + 0.5 * y * y);
}

}  // namespace

bool ScenarioSpec::univariate() const { return family_table().at(family).univariate; }

double ScenarioSpec::null_theta() const { return family_table().at(family).null_theta; }

std::pair<double, double> ScenarioSpec::theta_range() const {
    const auto& info = family_table().at(family);
    return {info.lo, info.hi};
}

ScenarioSpec ScenarioSpec::null_spec() const {
    ScenarioSpec s = *this;
    s.theta = null_theta();
    return s;
}

std::optional<ScenarioFamily> parse_family(const std::string& tag) {
    for (const auto& [fam, info] : family_table())
        if (tag == info.tag) return fam;
    return std::nullopt;
}

std::string family_tag(ScenarioFamily family) { return family_table().at(family).tag; }

std::vector<std::string> known_family_tags() {
    std::vector<std::string> tags;
    for (const auto& [fam, info] : family_table()) tags.emplace_back(info.tag);
    return tags;
}

Dataset bootstrap_sample(const Dataset& reference, Eigen::Index n, Rng& rng) {
    if (reference.rows() == 0) throw UsageError("bootstrap_sample: empty reference");
    std::uniform_int_distribution<Eigen::Index> pick(0, reference.rows() - 1);
    Dataset out(n, reference.cols());
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = reference.row(pick(rng));
    return out;
}

Dataset sample(const ScenarioSpec& spec, Eigen::Index n, Rng& rng) {
    const auto& info = family_table().at(spec.family);
    if (spec.family != ScenarioFamily::Bootstrap &&
        (spec.theta < info.lo || spec.theta > info.hi))
        std::cerr << "warning: theta = " << spec.theta << " outside the documented range ["
                  << info.lo << ", " << info.hi << "] for " << info.tag << "\n";

    std::normal_distribution<double> std_normal(0.0, 1.0);
    const double th = spec.theta;

    switch (spec.family) {
        case ScenarioFamily::NormalMean: {
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = th + std_normal(rng);
            return out;
        }
        case ScenarioFamily::NormalVar: {
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = th * std_normal(rng);
            return out;
        }
        case ScenarioFamily::LogNormalMean: {
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = std::exp(th + std_normal(rng));
            return out;
        }
        case ScenarioFamily::LogNormalVar: {
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = std::exp(th * std_normal(rng));
            return out;
        }
        case ScenarioFamily::BetaSymmetry: {
            std::gamma_distribution<double> g(th, 1.0);
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) {
                double a = g(rng), b = g(rng);
                out(i, 0) = a / (a + b);
            }
            return out;
        }
        case ScenarioFamily::GammaShape: {
            std::gamma_distribution<double> g(th, 0.5);  // rate 2
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = g(rng);
            return out;
        }
        case ScenarioFamily::NormalMixture: {
            std::bernoulli_distribution coin(0.5);
            Dataset out(n, 1);
            for (Eigen::Index i = 0; i < n; ++i)
                out(i, 0) = (coin(rng) ? th : -th) + std_normal(rng);
            return out;
        }
        case ScenarioFamily::FatTails: {
            Dataset out(n, 1);
            if (th == 0.0) {  // t(inf) = N(0,1), the exact null
                for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = std_normal(rng);
            } else {
                std::student_t_distribution<double> t(1.0 / th);
                for (Eigen::Index i = 0; i < n; ++i) out(i, 0) = t(rng);
            }
            return out;
        }
        case ScenarioFamily::MvnMean: {
            int d = spec.dimension > 1 ? spec.dimension : 100;
            Dataset out(n, d);
            for (Eigen::Index i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) out(i, j) = std_normal(rng);
            out.col(0).array() += th;
            return out;
        }
        case ScenarioFamily::MvnVar: {
            int d = spec.dimension > 1 ? spec.dimension : 100;
            Dataset out(n, d);
            for (Eigen::Index i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) out(i, j) = std_normal(rng);
            out.col(0) *= std::sqrt(th);
            return out;
        }
        case ScenarioFamily::Bootstrap: {
            if (!spec.reference) throw UsageError("bootstrap scenario needs a reference dataset");
            return bootstrap_sample(*spec.reference, n, rng);
        }
    }
    throw ConfigError("unknown scenario family");
}

NullSampler make_null_sampler(const ScenarioSpec& spec) {
    ScenarioSpec null = spec.null_spec();
    return [null](Eigen::Index n, Rng& rng) { return sample(null, n, rng); };
}

std::function<double(double)> null_cdf(const ScenarioSpec& spec) {
    switch (spec.family) {
        case ScenarioFamily::NormalMean:
        case ScenarioFamily::NormalVar:
        case ScenarioFamily::NormalMixture:
        case ScenarioFamily::FatTails:
            return [](double x) { return normal_cdf(x); };
        case ScenarioFamily::LogNormalMean:
        case ScenarioFamily::LogNormalVar:
            return [](double x) { return x <= 0.0 ? 0.0 : normal_cdf(std::log(x)); };
        case ScenarioFamily::BetaSymmetry:
            return [](double x) { return std::clamp(x, 0.0, 1.0); };
        case ScenarioFamily::GammaShape:
            return [](double x) { return gamma3_cdf_rate2(x); };
        default:
            throw UsageError("null CDF is defined for univariate scenarios only");
    }
}

namespace {

std::vector<double> to_sorted_univariate(const Dataset& data) {
    if (data.cols() != 1) throw UsageError("univariate test on multivariate data");
    if (data.rows() == 0) throw UsageError("empty dataset");
    std::vector<double> x(data.data(), data.data() + data.rows());
    std::sort(x.begin(), x.end());
    return x;
}

double ks_d_from_u(const std::vector<double>& u_sorted) {
    const double n = static_cast<double>(u_sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u_sorted.size(); ++i) {
        double hi = (static_cast<double>(i) + 1.0) / n - u_sorted[i];
        double lo = u_sorted[i] - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

double ad_a2_from_u(std::vector<double> u) {
    const auto n = u.size();
    const double eps = 1e-300;
    for (auto& v : u) v = std::clamp(v, eps, 1.0 - 1e-16);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += (2.0 * static_cast<double>(i) + 1.0) *
               (std::log(u[i]) + std::log1p(-u[n - 1 - i]));
    return -static_cast<double>(n) - sum / static_cast<double>(n);
}

// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

// Marsaglia & Marsaglia's asymptotic CDF of the case-0 Anderson-Darling
// statistic.
double ad_asymptotic_cdf(double z) {
    if (z <= 0.0) return 0.0;
    if (z < 2.0)
        return std::exp(-1.2337141 / z) / std::sqrt(z) *
               (2.00012 +
                (0.247105 -
                 (0.0649821 - (0.0347962 - (0.0116720 - 0.00168691 * z) * z) * z) * z) *
                    z);
    return std::exp(
        -std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 -
                                                  (0.008056 - 0.0003146 * z) * z) *
                                                     z) *
                                          z) *
                               z));
}

// Distribution-free Monte Carlo null samples of KS D_n / AD A^2, cached by n.
const std::vector<double>& mc_null_sample(bool anderson, std::size_t n,
                                          std::uint64_t seed) {
    static std::mutex mu;
    static std::map<std::tuple<bool, std::size_t, std::uint64_t>, std::vector<double>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(anderson, n, seed);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const int reps = 4000;
    std::vector<double> stats(reps);
    Rng rng = make_stream(seed, 0xcafe, n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(n);
    for (int b = 0; b < reps; ++b) {
        for (auto& v : u) v = unif(rng);
        std::sort(u.begin(), u.end());
        stats[static_cast<std::size_t>(b)] = anderson ? ad_a2_from_u(u) : ks_d_from_u(u);
    }
    std::sort(stats.begin(), stats.end());
    return cache.emplace(key, std::move(stats)).first->second;
}

}  // namespace

TestOutcome ks_statistic(const Dataset& data, const std::function<double(double)>& cdf,
                         int mc_threshold, std::uint64_t mc_seed) {
    auto x = to_sorted_univariate(data);
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = cdf(x[i]);

    TestOutcome out;
    out.statistic = ks_d_from_u(u);
    const auto n = x.size();
    if (static_cast<int>(n) < mc_threshold) {
        out.p_value = mc_p_value(out.statistic, mc_null_sample(false, n, mc_seed));
    } else {
        // Stephens' finite-n adjustment of the asymptotic series
        double sn = std::sqrt(static_cast<double>(n));
        out.p_value = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * out.statistic);
        out.p_value = std::max(out.p_value, 1e-16);
    }
    return out;
}

TestOutcome ad_statistic(const Dataset& data, const std::function<double(double)>& cdf,
                         int mc_threshold, std::uint64_t mc_seed) {
    auto x = to_sorted_univariate(data);
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = cdf(x[i]);

    TestOutcome out;
    out.statistic = ad_a2_from_u(u);
    const auto n = x.size();
    if (static_cast<int>(n) < mc_threshold) {
        out.p_value = mc_p_value(out.statistic, mc_null_sample(true, n, mc_seed));
    } else {
        out.p_value = std::clamp(1.0 - ad_asymptotic_cdf(out.statistic), 1e-16, 1.0);
    }
    return out;
}

}  // namespace sst
