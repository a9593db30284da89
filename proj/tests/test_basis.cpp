#include <doctest.h>

#include <cmath>
#include <random>

#include "pgee/basis.hpp"
#include "pgee/linalg.hpp"

using namespace pgee;

namespace {

std::vector<double> uniform_grid(int L, double lo, double hi) {
    std::vector<double> g(L);
    for (int i = 0; i < L; ++i) g[i] = lo + (hi - lo) * i / (L - 1.0);
    return g;
}

} // namespace

TEST_SUITE("basis") {

TEST_CASE("dimensions") {
    CHECK(basis_dim(BasisSpec::bspline(4, 3, 1.0)) == 6);
    CHECK(basis_dim(BasisSpec::fourier(1, 1.0)) == 2);
    CHECK(basis_dim(BasisSpec::bspline(4, 0, 1.0)) == 3);
}

TEST_CASE("Fourier K=1 at t=0 gives (sin, cos) = (0, 1)") {
    const Eigen::MatrixXd phi = evaluate_raw(BasisSpec::fourier(1, 1.0), {0.0});
    REQUIRE(phi.cols() == 2);
    CHECK(phi(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(phi(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("full B-spline basis is a partition of unity") {
    const auto times = uniform_grid(37, 0.0, 5.0);
    const Eigen::MatrixXd full = bspline_full_basis(4, 2, 5.0, times);
    REQUIRE(full.cols() == 6);
    for (int r = 0; r < full.rows(); ++r) {
        CHECK(full.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(full.row(r).minCoeff() >= 0.0);
    }
}

TEST_CASE("centered Fourier columns are discretely orthogonal") {
    std::vector<double> times(10);
    for (int i = 0; i < 10; ++i) times[i] = i;  // [0, 10) grid
    const BasisMatrix b = evaluate(BasisSpec::fourier(2, 10.0), times);
    const Eigen::MatrixXd gram = b.values.transpose() * b.values;
    for (int i = 0; i < gram.rows(); ++i)
        for (int j = 0; j < gram.cols(); ++j)
            if (i != j) CHECK(std::abs(gram(i, j)) < 1e-10);
}

TEST_CASE("centering removes column means and shifts rows by a constant") {
    const auto times = uniform_grid(12, 0.0, 3.0);
    const BasisSpec spec = BasisSpec::bspline(4, 2, 3.0);
    const BasisMatrix centered = evaluate(spec, times);
    const Eigen::MatrixXd raw = evaluate_raw(spec, times);
    for (int c = 0; c < centered.values.cols(); ++c) {
        CHECK(std::abs(centered.values.col(c).mean()) < 1e-12);
        const Eigen::VectorXd diff = raw.col(c) - centered.values.col(c);
        CHECK((diff.array() - diff[0]).abs().maxCoeff() < 1e-12);
    }
    CHECK((centered.offsets.transpose() -
           (raw.colwise().mean().transpose()))
              .lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("evaluate_at reuses stored offsets") {
    const auto times = uniform_grid(8, 0.0, 2.0);
    const BasisSpec spec = BasisSpec::fourier(2, 2.0);
    const BasisMatrix b = evaluate(spec, times);
    const Eigen::MatrixXd again = evaluate_at(spec, times, b.offsets);
    CHECK((again - b.values).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("times outside the domain are rejected") {
    CHECK_THROWS_AS(evaluate(BasisSpec::bspline(4, 1, 1.0), {0.5, 1.5}), TimeOutOfDomain);
    CHECK_THROWS_AS(evaluate(BasisSpec::fourier(1, 1.0), {-0.1}), TimeOutOfDomain);
}

TEST_CASE("ridge penalty is the identity") {
    const auto p = penalty_matrix(BasisSpec::bspline(4, 3, 1.0), 0);
    CHECK((p.values - Eigen::MatrixXd::Identity(6, 6)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("second-difference penalty at d=3 matches the hand computation") {
    const auto p = penalty_matrix(BasisSpec::bspline(4, 0, 1.0), 2);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, -2, 1, -2, 4, -2, 1, -2, 1;
    CHECK((p.values - expected).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("second-difference penalty annihilates linear sequences") {
    const auto p = penalty_matrix(BasisSpec::bspline(4, 4, 1.0), 2);
    Eigen::VectorXd lin(p.values.rows());
    for (int i = 0; i < lin.size(); ++i) lin[i] = i + 1.0;
    CHECK((p.values * lin).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("order-2 penalty needs d >= 3") {
    CHECK_THROWS_AS(penalty_matrix(BasisSpec::fourier(1, 1.0), 2), PenaltyOrderTooHigh);
}

TEST_CASE("penalties are symmetric PSD on random vectors") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (const auto& p : {penalty_matrix(BasisSpec::bspline(4, 5, 1.0), 2),
                          penalty_matrix(BasisSpec::fourier(3, 1.0), 0)}) {
        CHECK((p.values - p.values.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
        Eigen::VectorXd x(p.values.rows());
        for (int trial = 0; trial < 1000; ++trial) {
            for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
            CHECK(x.dot(p.values * x) >= -1e-10);
        }
    }
}

TEST_CASE("basis matrices have full column rank on spread-out grids") {
    const auto times = uniform_grid(25, 0.0, 4.0);
    for (const auto& spec : {BasisSpec::bspline(4, 3, 4.0), BasisSpec::fourier(2, 4.0)}) {
        const BasisMatrix b = evaluate(spec, times);
        CHECK(numeric_rank(b.values) == basis_dim(spec));
    }
}

TEST_CASE("no basis column is identically zero") {
    const auto times = uniform_grid(15, 0.0, 1.0);
    const BasisMatrix b = evaluate(BasisSpec::bspline(4, 2, 1.0), times);
    for (int c = 0; c < b.values.cols(); ++c)
        CHECK(b.values.col(c).lpNorm<Eigen::Infinity>() > 1e-8);
}

TEST_CASE("default penalty orders") {
    CHECK(default_penalty_order(BasisSpec::bspline(4, 3, 1.0)) == 2);
    CHECK(default_penalty_order(BasisSpec::fourier(2, 1.0)) == 0);
}

} // TEST_SUITE
