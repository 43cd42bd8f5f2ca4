#include "sst/kernel_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sst {

void KernelConfig::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw ConfigError("kernel bandwidth must be positive and finite, got " +
                          std::to_string(bandwidth));
}

double squared_euclidean(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                         const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    if (a.size() != b.size())
        throw ConfigError("point dimension mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
    return (a - b).squaredNorm();
}

double gaussian_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b,
                       const KernelConfig& cfg) {
    cfg.validate();
    return std::exp(-squared_euclidean(a, b) / cfg.bandwidth);
}

Eigen::MatrixXd squared_distances(const Dataset& rows, const Dataset& cols) {
    if (rows.rows() == 0 || cols.rows() == 0)
        throw ConfigError("empty dataset in distance computation");
    if (rows.cols() != cols.cols())
        throw ConfigError("dataset dimension mismatch: " + std::to_string(rows.cols()) +
                          " vs " + std::to_string(cols.cols()));
    Eigen::VectorXd rn = rows.rowwise().squaredNorm();
    Eigen::VectorXd cn = cols.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * rows * cols.transpose());
    d2.colwise() += rn;
    d2.rowwise() += cn.transpose();
    // rounding can push tiny distances below zero
    return d2.cwiseMax(0.0);
}

Eigen::MatrixXd gram_matrix(const Dataset& rows, const Dataset& cols,
                            const KernelConfig& cfg) {
    cfg.validate();
    Eigen::MatrixXd d2 = squared_distances(rows, cols);
    return (-d2 / cfg.bandwidth).array().exp();
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw ConfigError("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double h = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<KernelConfig> bandwidth_grid(const Dataset& reference_sample,
                                         const BandwidthGridSpec& spec) {
    const auto m = reference_sample.rows();
    if (m < 2) throw ConfigError("bandwidth_grid needs a reference sample of size >= 2");

    // all unordered pairs, self-distances excluded
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            d2.push_back((reference_sample.row(i) - reference_sample.row(j)).squaredNorm());
    std::sort(d2.begin(), d2.end());

    const double low_p = spec.literal_low_quantile ? 0.00833 : 5.0 / 6.0;
    std::vector<double> eps;
    for (int k = 1; k <= 4; ++k) eps.push_back(quantile_sorted(d2, k / 6.0));
    const double q_low = quantile_sorted(d2, low_p);
    for (int mult = 1; mult <= 6; ++mult) eps.push_back(mult * q_low);

    std::vector<KernelConfig> grid;
    grid.reserve(eps.size());
    for (double e : eps) {
        if (!(e > 0.0))
            throw CalibrationError("degenerate reference sample: pairwise-distance "
                                   "quantile is zero, cannot form a bandwidth grid");
        grid.push_back(KernelConfig{e});
    }
    return grid;
}

Dataset read_csv_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("non-numeric cell '" + cell + "' in " + path +
                                     " line " + std::to_string(lineno),
                                 0);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("ragged CSV row in " + path + " line " + std::to_string(lineno),
                             0);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty dataset: " + path);
    Dataset out(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return out;
}

void write_csv_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    char buf[64];
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data(i, j));
            out << buf << (j + 1 < data.cols() ? "," : "");
        }
        out << '\n';
    }
}

}  // namespace sst
