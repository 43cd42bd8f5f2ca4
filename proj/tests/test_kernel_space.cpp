#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "sst/kernel_space.hpp"

using namespace sst;

namespace {

Eigen::RowVectorXd point(std::initializer_list<double> coords) {
    Eigen::RowVectorXd p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p(i++) = c;
    return p;
}

}  // namespace

TEST_CASE("squared_euclidean basics") {
    CHECK(squared_euclidean(point({0, 0}), point({0, 0})) == 0.0);
    CHECK(squared_euclidean(point({1, 0}), point({0, 0})) == 1.0);
    CHECK(squared_euclidean(point({3, 4}), point({0, 0})) == 25.0);
    CHECK(squared_euclidean(point({3, 4}), point({0, 0})) ==
          squared_euclidean(point({0, 0}), point({3, 4})));
    CHECK_THROWS_AS(squared_euclidean(point({1}), point({1, 2})), ConfigError);
}

TEST_CASE("gaussian_kernel values") {
    KernelConfig cfg{2.0};
    CHECK(gaussian_kernel(point({1, 2}), point({1, 2}), cfg) == 1.0);
    // d^2 = eps
    CHECK(gaussian_kernel(point({std::sqrt(2.0)}), point({0}), cfg) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(gaussian_kernel(point({3, 4}), point({0, 0}), KernelConfig{50.0}) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(gaussian_kernel(point({0}), point({0}), KernelConfig{0.0}), ConfigError);
    CHECK_THROWS_AS(gaussian_kernel(point({0}), point({0}), KernelConfig{-1.0}), ConfigError);
}

TEST_CASE("gaussian_kernel monotonicity") {
    // decreasing in d^2 at fixed eps, increasing in eps at fixed d^2 > 0
    KernelConfig cfg{1.5};
    double prev = 1.0;
    for (double d = 0.5; d < 5.0; d += 0.5) {
        double k = gaussian_kernel(point({d}), point({0}), cfg);
        CHECK(k < prev);
        prev = k;
    }
    prev = 0.0;
    for (double eps = 0.5; eps < 5.0; eps += 0.5) {
        double k = gaussian_kernel(point({1.0}), point({0}), KernelConfig{eps});
        CHECK(k > prev);
        prev = k;
    }
}

TEST_CASE("gram_matrix examples") {
    Dataset single(1, 2);
    single << 0.5, -0.5;
    auto g1 = gram_matrix(single, single, KernelConfig{1.0});
    CHECK(g1.rows() == 1);
    CHECK(g1(0, 0) == 1.0);

    Dataset two(2, 1);
    two << 0, 1;
    auto g2 = gram_matrix(two, two, KernelConfig{1.0});
    CHECK(g2(0, 0) == doctest::Approx(1.0));
    CHECK(g2(0, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(g2(1, 0) == doctest::Approx(std::exp(-1.0)));
    CHECK(g2(1, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(gram_matrix(Dataset(0, 1), two, KernelConfig{1.0}), ConfigError);
}

TEST_CASE("gram_matrix symmetry and range on random data") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        int m = 3 + static_cast<int>(rng() % 20);
        int d = 1 + static_cast<int>(rng() % 3);
        Dataset pts(m, d);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < d; ++j) pts(i, j) = gauss(rng);
        auto g = gram_matrix(pts, pts, KernelConfig{0.7});
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(g.minCoeff() > 0.0);
        CHECK(g.maxCoeff() <= 1.0 + 1e-15);
        for (int i = 0; i < m; ++i) CHECK(g(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("bandwidth_grid: single pairwise distance") {
    Dataset two(2, 1);
    two << 0, 1;
    auto grid = bandwidth_grid(two);
    REQUIRE(grid.size() == 10);
    std::vector<double> expected = {1, 1, 1, 1, 1, 2, 3, 4, 5, 6};
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(grid[i].bandwidth == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("bandwidth_grid: constant distances land in {c..6c}") {
    // equilateral triangle, all pairwise d^2 = 3
    Dataset tri(3, 2);
    tri << 0, 0, std::sqrt(3.0), 0, std::sqrt(3.0) / 2, 1.5;
    auto grid = bandwidth_grid(tri);
    REQUIRE(grid.size() == 10);
    for (const auto& cfg : grid) {
        double ratio = cfg.bandwidth / 3.0;
        CHECK(std::abs(ratio - std::round(ratio)) < 1e-9);
        CHECK(ratio >= 1.0 - 1e-9);
        CHECK(ratio <= 6.0 + 1e-9);
    }
}

TEST_CASE("bandwidth_grid: permutation invariance") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    Dataset pts(25, 2);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 2; ++j) pts(i, j) = gauss(rng);
    auto grid_a = bandwidth_grid(pts);

    std::vector<int> perm(25);
    for (int i = 0; i < 25; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Dataset shuffled(25, 2);
    for (int i = 0; i < 25; ++i) shuffled.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
    auto grid_b = bandwidth_grid(shuffled);

    for (std::size_t i = 0; i < grid_a.size(); ++i)
        CHECK(grid_a[i].bandwidth == doctest::Approx(grid_b[i].bandwidth).epsilon(1e-12));
}

TEST_CASE("bandwidth_grid: degenerate sample and tiny sample") {
    Dataset same(5, 1);
    same.setConstant(2.0);
    CHECK_THROWS_AS(bandwidth_grid(same), CalibrationError);
    CHECK_THROWS_AS(bandwidth_grid(Dataset(1, 1)), ConfigError);
}

TEST_CASE("bandwidth_grid: literal low-quantile reading is selectable") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Dataset pts(40, 1);
    for (int i = 0; i < 40; ++i) pts(i, 0) = gauss(rng);
    BandwidthGridSpec literal;
    literal.literal_low_quantile = true;
    auto g_default = bandwidth_grid(pts);
    auto g_literal = bandwidth_grid(pts, literal);
    // the multiplier base moves from the 5/6 quantile to a near-minimum one
    CHECK(g_literal[4].bandwidth < g_default[4].bandwidth);
}

TEST_CASE("quantile_sorted interpolates") {
    std::vector<double> v = {1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("CSV dataset round trip") {
    Dataset pts(3, 2);
    pts << 1.5, -2.25, 0.0, 1e-8, 3.14159, 42;
    std::string path = "test_roundtrip.csv";
    write_csv_dataset(path, pts);
    Dataset back = read_csv_dataset(path);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 2);
    CHECK((back - pts).cwiseAbs().maxCoeff() == 0.0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_csv_dataset("no_such_file.csv"), IoError);
}
