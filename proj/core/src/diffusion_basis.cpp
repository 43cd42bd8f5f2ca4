#include "sst/diffusion_basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace sst {

MarkovMatrix row_normalize(const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols()) throw ConfigError("row_normalize requires a square matrix");
    Vector degree = K.rowwise().sum();
    if ((degree.array() <= 0.0).any())
        throw NumericalError("zero or negative row sum in Gram matrix");
    MarkovMatrix mm;
    mm.A = degree.cwiseInverse().asDiagonal() * K;
    mm.degree = std::move(degree);
    return mm;
}

DiffusionBasis DiffusionBasis::build(const Dataset& training_points,
                                     const KernelConfig& kernel, int max_index) {
    kernel.validate();
    const Eigen::Index m = training_points.rows();
    if (m == 0) throw ConfigError("empty training sample");
    if (max_index < 0 || max_index >= m)
        throw ConfigError("max_index must satisfy 0 <= max_index < m, got " +
                          std::to_string(max_index) + " with m = " + std::to_string(m));

    Eigen::MatrixXd K = gram_matrix(training_points, training_points, kernel);
    Vector degree = K.rowwise().sum();
    if ((degree.array() <= 0.0).any())
        throw NumericalError("zero row sum in Gram matrix");

    // Symmetric conjugate S = D^{-1/2} K D^{-1/2}; same eigenvalues as A,
    // right eigenvectors of A are D^{-1/2} times the eigenvectors of S.
    Vector d_inv_sqrt = degree.array().rsqrt();
    Eigen::MatrixXd S = d_inv_sqrt.asDiagonal() * K * d_inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
    if (solver.info() != Eigen::Success)
        throw NumericalError("symmetric eigensolver failed to converge");

    DiffusionBasis basis;
    basis.training_ = training_points;
    basis.kernel_ = kernel;
    basis.degree_ = degree;
    basis.degree_mean_ = degree.sum() / static_cast<double>(m);
    basis.eigenvalues_.resize(max_index + 1);
    basis.eigenvectors_.resize(max_index + 1, m);

    const double sqrt_m = std::sqrt(static_cast<double>(m));
    // solver returns eigenvalues ascending; take the top max_index+1 descending
    for (int i = 0; i <= max_index; ++i) {
        Eigen::Index col = m - 1 - i;
        basis.eigenvalues_(i) = solver.eigenvalues()(col);
        Vector psi = d_inv_sqrt.asDiagonal() * solver.eigenvectors().col(col);
        psi *= sqrt_m / psi.norm();
        double s = psi.sum();
        if (s < 0.0) {
            psi = -psi;
        } else if (s == 0.0) {
            for (Eigen::Index j = 0; j < m; ++j) {
                if (psi(j) != 0.0) {
                    if (psi(j) < 0.0) psi = -psi;
                    break;
                }
            }
        }
        basis.eigenvectors_.row(i) = psi.transpose();
    }
    return basis;
}

Vector DiffusionBasis::nystrom_extend(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    Eigen::MatrixXd psi;
    Vector s;
    Dataset one(1, x.size());
    one.row(0) = x;
    extend_all(one, max_index(), psi, s);
    return psi.row(0).transpose();
}

void DiffusionBasis::extend_all(const Dataset& points, int max_idx,
                                Eigen::MatrixXd& psi_out, Vector& s_out) const {
    if (max_idx < 0 || max_idx > max_index())
        throw ConfigError("extension index out of basis range");
    for (int i = 0; i <= max_idx; ++i)
        if (eigenvalues_(i) < kEigenvalueFloor)
            throw DegenerateEigenvalueError(i, eigenvalues_(i));

    const Eigen::Index n = points.rows();
    psi_out.resize(n, max_idx + 1);
    s_out.resize(n);
    const auto top = eigenvectors_.topRows(max_idx + 1);  // (max_idx+1) x m
    const Vector inv_lambda = eigenvalues_.head(max_idx + 1).cwiseInverse();
    // one point at a time, so results do not depend on the row order of points
    Vector kx(training_.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
        kx = (-(training_.rowwise() - points.row(i)).rowwise().squaredNorm() /
              kernel_.bandwidth)
                 .array()
                 .exp();
        double row_sum = kx.sum();
        s_out(i) = row_sum / degree_mean_;
        // weighted averages of the eigenvector rows, scaled by 1/lambda_i
        psi_out.row(i) = ((top * kx) / row_sum).cwiseProduct(inv_lambda).transpose();
    }
}

double DiffusionBasis::s_hat(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double num = 0.0;
    for (Eigen::Index j = 0; j < training_.rows(); ++j)
        num += std::exp(-(x - training_.row(j)).squaredNorm() / kernel_.bandwidth);
    return num / degree_mean_;
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'T', 'B', 'A', 'S', '1', '\n'};

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    std::int64_t r = m.rows(), c = m.cols();
    out.write(reinterpret_cast<const char*>(&r), sizeof r);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.write(reinterpret_cast<const char*>(m.row(i).eval().data()),
                  sizeof(double) * m.cols());
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    std::int64_t r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&r), sizeof r);
    in.read(reinterpret_cast<char*>(&c), sizeof c);
    if (!in || r < 0 || c < 0) throw ParseError("bad matrix header in basis artifact", 0);
    Eigen::MatrixXd m(r, c);
    std::vector<double> row(static_cast<std::size_t>(c));
    for (std::int64_t i = 0; i < r; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), sizeof(double) * c);
        if (!in) throw ParseError("truncated basis artifact", 0);
        for (std::int64_t j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
}

}  // namespace

void DiffusionBasis::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&kernel_.bandwidth), sizeof(double));
    out.write(reinterpret_cast<const char*>(&degree_mean_), sizeof(double));
    write_matrix(out, training_);
    write_matrix(out, eigenvectors_);
    write_matrix(out, eigenvalues_);
    write_matrix(out, degree_);
}

DiffusionBasis DiffusionBasis::load(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw ParseError("not a basis artifact (bad magic)", 0);
    DiffusionBasis b;
    in.read(reinterpret_cast<char*>(&b.kernel_.bandwidth), sizeof(double));
    in.read(reinterpret_cast<char*>(&b.degree_mean_), sizeof(double));
    b.training_ = read_matrix(in);
    b.eigenvectors_ = read_matrix(in);
    b.eigenvalues_ = read_matrix(in);
    b.degree_ = read_matrix(in);
    if (!in) throw ParseError("truncated basis artifact", 0);
    return b;
}

void DiffusionBasis::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save(out);
}

DiffusionBasis DiffusionBasis::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return load(in);
}

}  // namespace sst
