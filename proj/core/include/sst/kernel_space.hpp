#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sst/error.hpp"

namespace sst {

// A dataset is a dense row-major table: one point per row, d columns.
using Dataset = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct KernelConfig {
    double bandwidth;  // epsilon, in units of squared distance

    void validate() const;
};

double squared_euclidean(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                         const Eigen::Ref<const Eigen::RowVectorXd>& b);

double gaussian_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b,
                       const KernelConfig& cfg);

// Entry (i,j) = exp(-|rows_i - cols_j|^2 / eps). Symmetric with unit diagonal
// when rows and cols are the same dataset.
Eigen::MatrixXd gram_matrix(const Dataset& rows, const Dataset& cols,
                            const KernelConfig& cfg);

// Pairwise squared distances between the rows of two datasets, n x m.
Eigen::MatrixXd squared_distances(const Dataset& rows, const Dataset& cols);

struct BandwidthGridSpec {
    // The low-labelled quantile is read as 5/6 by default, completing the
    // arithmetic sequence 1/6..4/6; the literal 0.833% reading is selectable
    // for sensitivity checks.
    bool literal_low_quantile = false;
};

// Linear-interpolation quantile of a sorted vector, p in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double p);

// Ten bandwidths from the quantiles of the m(m-1)/2 pairwise squared
// distances of the reference sample: q(1/6), q(2/6), q(3/6), q(4/6), and
// {1,...,6} x q(5/6).
std::vector<KernelConfig> bandwidth_grid(const Dataset& reference_sample,
                                         const BandwidthGridSpec& spec = {});

// Headerless CSV, one point per row.
Dataset read_csv_dataset(const std::string& path);
void write_csv_dataset(const std::string& path, const Dataset& data);

}  // namespace sst
