#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sst/diffusion_basis.hpp"

using namespace sst;

namespace {

Dataset random_points(std::mt19937_64& rng, int m, int d) {
    std::normal_distribution<double> gauss;
    Dataset pts(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = gauss(rng);
    return pts;
}

// Independent oracle: eigenpairs of the explicit non-symmetric A = D^{-1} K,
// via the general (complex) eigensolver, normalized and sign-fixed the same
// way the implementation is.
struct OracleBasis {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // rows, like DiffusionBasis::eigenvectors()
};

OracleBasis oracle_eigenbasis(const Dataset& pts, const KernelConfig& cfg, int top) {
    const Eigen::Index m = pts.rows();
    Eigen::MatrixXd K(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            K(i, j) = std::exp(-(pts.row(i) - pts.row(j)).squaredNorm() / cfg.bandwidth);
    Eigen::MatrixXd A = K.rowwise().sum().cwiseInverse().asDiagonal() * K;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(A);
    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index i = 0; i < m; ++i)
        order.emplace_back(solver.eigenvalues()(i).real(), i);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    OracleBasis out;
    out.values.resize(top + 1);
    out.vectors.resize(top + 1, m);
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    for (int i = 0; i <= top; ++i) {
        out.values(i) = order[static_cast<std::size_t>(i)].first;
        Eigen::VectorXd v =
            solver.eigenvectors().col(order[static_cast<std::size_t>(i)].second).real();
        v *= sqrt_m / v.norm();
        if (v.sum() < 0) v = -v;
        out.vectors.row(i) = v.transpose();
    }
    return out;
}

}  // namespace

TEST_CASE("row_normalize examples") {
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    auto mm1 = row_normalize(one);
    CHECK(mm1.A(0, 0) == 1.0);
    CHECK(mm1.degree(0) == 1.0);

    Eigen::MatrixXd K(2, 2);
    double e = std::exp(-1.0);
    K << 1, e, e, 1;
    auto mm = row_normalize(K);
    CHECK(mm.A.row(0).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mm.A.row(1).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mm.A(0, 1) == doctest::Approx(e / (1 + e)).epsilon(1e-14));

    CHECK_THROWS_AS(row_normalize(Eigen::MatrixXd::Zero(3, 2)), ConfigError);
}

TEST_CASE("row_normalize: random matrices are row-stochastic") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 5; ++trial) {
        Dataset pts = random_points(rng, 12, 2);
        auto K = gram_matrix(pts, pts, KernelConfig{1.3});
        auto mm = row_normalize(K);
        CHECK((mm.A.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
        CHECK(mm.A.minCoeff() >= 0.0);
    }
}

TEST_CASE("eigenbasis: m=3 line matches dense non-symmetric oracle") {
    Dataset pts(3, 1);
    pts << 0, 1, 2;
    KernelConfig cfg{1.0};
    auto basis = DiffusionBasis::build(pts, cfg, 2);
    auto oracle = oracle_eigenbasis(pts, cfg, 2);
    for (int i = 0; i <= 2; ++i) {
        CHECK(basis.eigenvalues()(i) == doctest::Approx(oracle.values(i)).epsilon(1e-8));
        // up to sign: the sign convention is ambiguous when the vector sums to ~0
        double same = (basis.eigenvectors().row(i) - oracle.vectors.row(i))
                          .cwiseAbs()
                          .maxCoeff();
        double flip = (basis.eigenvectors().row(i) + oracle.vectors.row(i))
                          .cwiseAbs()
                          .maxCoeff();
        CHECK(std::min(same, flip) < 1e-8);
    }
}

TEST_CASE("eigenbasis: structural invariants over random inputs") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        int m = 5 + static_cast<int>(rng() % 30);
        int d = 1 + static_cast<int>(rng() % 3);
        int top = std::min(4, m - 1);
        Dataset pts = random_points(rng, m, d);
        auto basis = DiffusionBasis::build(pts, KernelConfig{1.0 + 0.2 * d}, top);

        CHECK(std::abs(basis.eigenvalues()(0) - 1.0) < 1e-8);
        CHECK((basis.eigenvectors().row(0).array() - 1.0).abs().maxCoeff() < 1e-8);
        for (int i = 1; i <= top; ++i)
            CHECK(basis.eigenvalues()(i) <= basis.eigenvalues()(i - 1) + 1e-12);

        const double sqrt_m = std::sqrt(static_cast<double>(m));
        for (int i = 0; i <= top; ++i)
            CHECK(std::abs(basis.eigenvectors().row(i).norm() - sqrt_m) < 1e-8);

        // D-orthogonality
        for (int i = 0; i <= top; ++i)
            for (int j = i + 1; j <= top; ++j) {
                double dot = (basis.eigenvectors().row(i).transpose().array() *
                              basis.degree().array() *
                              basis.eigenvectors().row(j).transpose().array())
                                 .sum();
                double scale = basis.degree().sum();
                CHECK(std::abs(dot) / scale < 1e-6);
            }
    }
}

TEST_CASE("eigenbasis: bad arguments") {
    Dataset pts(3, 1);
    pts << 0, 1, 2;
    CHECK_THROWS_AS(DiffusionBasis::build(pts, KernelConfig{1.0}, 3), ConfigError);
    CHECK_THROWS_AS(DiffusionBasis::build(pts, KernelConfig{1.0}, -1), ConfigError);
    CHECK_THROWS_AS(DiffusionBasis::build(Dataset(0, 1), KernelConfig{1.0}, 0), ConfigError);
}

TEST_CASE("nystrom_extend: fixed point at training points") {
    std::mt19937_64 rng(29);
    Dataset pts = random_points(rng, 15, 2);
    auto basis = DiffusionBasis::build(pts, KernelConfig{2.0}, 4);
    for (Eigen::Index j = 0; j < pts.rows(); ++j) {
        Vector ext = basis.nystrom_extend(pts.row(j));
        for (int i = 0; i <= 4; ++i) {
            double stored = basis.eigenvectors()(i, j);
            double denom = std::max(std::abs(stored), 1e-12);
            CHECK(std::abs(ext(i) - stored) / denom < 1e-8);
        }
    }
}

TEST_CASE("nystrom_extend: component 0 is 1 anywhere") {
    std::mt19937_64 rng(31);
    Dataset pts = random_points(rng, 10, 1);
    auto basis = DiffusionBasis::build(pts, KernelConfig{1.0}, 3);
    for (double x : {-2.0, 0.3, 5.0})
        CHECK(basis.nystrom_extend(Eigen::RowVectorXd::Constant(1, x))(0) ==
              doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("nystrom_extend: m=3 line matches scalar formula at x=0.5") {
    Dataset pts(3, 1);
    pts << 0, 1, 2;
    KernelConfig cfg{1.0};
    auto basis = DiffusionBasis::build(pts, cfg, 2);

    // direct scalar evaluation of the extension formula
    double x = 0.5;
    double k0 = std::exp(-0.25), k1 = std::exp(-0.25), k2 = std::exp(-2.25);
    double ksum = k0 + k1 + k2;
    Vector ext = basis.nystrom_extend(Eigen::RowVectorXd::Constant(1, x));
    for (int i = 0; i <= 2; ++i) {
        double expected = (k0 * basis.eigenvectors()(i, 0) + k1 * basis.eigenvectors()(i, 1) +
                           k2 * basis.eigenvectors()(i, 2)) /
                          (ksum * basis.eigenvalues()(i));
        CHECK(ext(i) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("s_hat examples") {
    Dataset pts(2, 1);
    pts << 0, 1;
    auto basis = DiffusionBasis::build(pts, KernelConfig{1.0}, 1);
    CHECK(basis.s_hat(Eigen::RowVectorXd::Constant(1, 0.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(basis.s_hat(Eigen::RowVectorXd::Constant(1, 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(basis.s_hat(Eigen::RowVectorXd::Constant(1, 100.0)) < 1e-12);
}

TEST_CASE("permuting training points permutes eigenvector columns") {
    std::mt19937_64 rng(37);
    Dataset pts = random_points(rng, 12, 2);
    auto basis = DiffusionBasis::build(pts, KernelConfig{1.5}, 3);

    std::vector<int> perm(12);
    for (int i = 0; i < 12; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset shuffled(12, 2);
    for (int i = 0; i < 12; ++i)
        shuffled.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
    auto basis_p = DiffusionBasis::build(shuffled, KernelConfig{1.5}, 3);

    for (int i = 0; i <= 3; ++i) {
        CHECK(basis.eigenvalues()(i) ==
              doctest::Approx(basis_p.eigenvalues()(i)).epsilon(1e-10));
        for (int j = 0; j < 12; ++j)
            CHECK(std::abs(basis_p.eigenvectors()(i, j) -
                           basis.eigenvectors()(i, perm[static_cast<std::size_t>(j)])) <
                  1e-7);
    }
}

TEST_CASE("duplicate training points are allowed") {
    Dataset pts(4, 1);
    pts << 0, 0, 1, 2;  // bootstrap nulls produce duplicates
    auto basis = DiffusionBasis::build(pts, KernelConfig{1.0}, 2);
    CHECK(std::abs(basis.eigenvalues()(0) - 1.0) < 1e-8);
}

TEST_CASE("basis serialization round trip") {
    std::mt19937_64 rng(41);
    Dataset pts = random_points(rng, 8, 2);
    auto basis = DiffusionBasis::build(pts, KernelConfig{0.9}, 3);

    std::stringstream buf;
    basis.save(buf);
    auto back = DiffusionBasis::load(buf);
    CHECK((back.eigenvalues() - basis.eigenvalues()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.eigenvectors() - basis.eigenvectors()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.training_points() - basis.training_points()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.kernel().bandwidth == basis.kernel().bandwidth);
    CHECK(back.degree_mean() == basis.degree_mean());

    std::stringstream bad("not a basis");
    CHECK_THROWS_AS(DiffusionBasis::load(bad), ParseError);
}
