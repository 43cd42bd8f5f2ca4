#pragma once

#include <iosfwd>
#include <string>

#include "sst/kernel_space.hpp"

namespace sst {

struct MarkovMatrix {
    Eigen::MatrixXd A;  // row-stochastic, D^{-1} K
    Vector degree;      // diagonal of D, strictly positive row sums of K
};

// A = D^{-1} K from a square symmetric Gram matrix.
MarkovMatrix row_normalize(const Eigen::MatrixXd& K);

// Eigenvalues below this floor make the Nystrom division unstable; settings
// hitting it are dropped from the tuning grid rather than extended.
inline constexpr double kEigenvalueFloor = 1e-8;

struct DegenerateEigenvalueError : NumericalError {
    DegenerateEigenvalueError(int index, double value)
        : NumericalError("eigenvalue " + std::to_string(index) + " = " +
                         std::to_string(value) + " is below the Nystrom floor"),
          index(index) {}
    int index;
};

// Diffusion eigenbasis estimated from an m-point F0 sample: eigenvalues and
// eigenvector table of the Markov matrix A, plus the degree data needed by
// the s-hat weight. Immutable once built; safe to share across workers.
class DiffusionBasis {
public:
    DiffusionBasis() = default;

    // Top (max_index+1) right eigenpairs of A = D^{-1} K, via the symmetric
    // conjugate D^{-1/2} K D^{-1/2}. Rows rescaled to norm sqrt(m), sign
    // fixed so each row sums >= 0 (row 0 becomes the constant +1 vector).
    static DiffusionBasis build(const Dataset& training_points,
                                const KernelConfig& kernel, int max_index);

    const Dataset& training_points() const { return training_; }
    const KernelConfig& kernel() const { return kernel_; }
    const Vector& eigenvalues() const { return eigenvalues_; }
    // (max_index+1) x m table, entry (i,j) = psi_i(y_j)
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
    const Vector& degree() const { return degree_; }
    double degree_mean() const { return degree_mean_; }
    int max_index() const { return static_cast<int>(eigenvalues_.size()) - 1; }
    Eigen::Index size() const { return training_.rows(); }

    // Nystrom extension at a single out-of-sample point; component i is the
    // kernel-weighted average of psi_i over the training points, divided by
    // lambda_i. Refuses eigenvalues below the floor.
    Vector nystrom_extend(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    // Batched extension: row k of the result is nystrom_extend(points.row(k))
    // truncated to components 0..max_index. s_hat values are returned
    // alongside since both need the same cross-kernel matrix.
    void extend_all(const Dataset& points, int max_index,
                    Eigen::MatrixXd& psi_out, Vector& s_out) const;

    // Ratio of the kernel degree of x to the mean training degree.
    double s_hat(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    void save(std::ostream& out) const;
    static DiffusionBasis load(std::istream& in);
    void save_file(const std::string& path) const;
    static DiffusionBasis load_file(const std::string& path);

private:
    Dataset training_;
    KernelConfig kernel_{1.0};
    Vector eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    Vector degree_;
    double degree_mean_ = 0.0;
};

}  // namespace sst
