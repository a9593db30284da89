#include <doctest.h>

#include <random>

#include "pgee/estimability.hpp"
#include "pgee/linalg.hpp"

using namespace pgee;

namespace {

CrossoverDesign abba(int n, int L) {
    return CrossoverDesign::make({{"A", "B"}, {"B", "A"}}, n, L);
}

CrossoverDesign williams(int n, int L) {
    return CrossoverDesign::make(
        {{"B", "A", "D", "C"}, {"C", "D", "A", "B"}, {"D", "B", "C", "A"}, {"A", "C", "B", "D"}},
        n, L);
}

bool assumption(const EstimabilityReport& r, const std::string& id) {
    for (const auto& d : r.assumption_results)
        if (d.id == id) return d.pass;
    return false;
}

} // namespace

TEST_SUITE("estimability") {

TEST_CASE("AB/BA with a 5-dim spline basis is 40x18") {
    const auto X = assemble_design_matrix(abba(1, 10), BasisSpec::bspline(4, 2, 10.0));
    CHECK(X.values.rows() == 40);
    CHECK(X.values.cols() == 18);
    CHECK(X.q == 18);

    int covered = 0;
    for (const auto& [name, range] : X.block_index) covered += range.second;
    CHECK(covered == 18);
    CHECK(X.block("intercept").second == 1);
    CHECK(X.block("treatment").second == 1);
    CHECK(X.block("period").second == 1);
    CHECK(X.block("time").second == 5);
    CHECK(X.block("carryover:A->B").second == 5);
    CHECK(X.block("carryover:B->A").second == 5);
}

TEST_CASE("carry-over columns vanish on period-1 rows") {
    const auto design = abba(2, 6);
    const auto X = assemble_design_matrix(design, BasisSpec::fourier(1, 6.0));
    const int L = 6;
    const auto [start, len] = X.block("carryover:A->B");
    const auto [start2, len2] = X.block("carryover:B->A");
    for (int unit = 0; unit < 4; ++unit) {
        const int p1_row = unit * 2 * L;  // first row of the unit's period 1
        for (int k = 0; k < L; ++k) {
            CHECK(X.values.block(p1_row + k, start, 1, len).cwiseAbs().sum() == 0.0);
            CHECK(X.values.block(p1_row + k, start2, 1, len2).cwiseAbs().sum() == 0.0);
        }
    }
}

TEST_CASE("balanced 4x4 design with Fourier K=1 is 96x33") {
    const auto X = assemble_design_matrix(williams(1, 6), BasisSpec::fourier(1, 6.0));
    CHECK(X.values.rows() == 96);
    CHECK(X.values.cols() == 33);  // 1 + 3 + 3 + 13*2
}

TEST_CASE("AB/BA L=10 d=5 certifies rank 18/18") {
    const auto report = check_estimability(abba(1, 10), BasisSpec::bspline(4, 2, 10.0));
    CHECK(report.estimable);
    CHECK(report.rank_found == 18);
    CHECK(report.rank_required == 18);
    CHECK(report.per_pair_active_counts.at("A->B") == 10);
    CHECK(report.per_pair_active_counts.at("B->A") == 10);
    for (const auto& d : report.assumption_results) CHECK(d.pass);
}

TEST_CASE("too few observations per period fails A4/A5") {
    const auto report = check_estimability(abba(2, 3), BasisSpec::bspline(4, 2, 3.0));
    CHECK_FALSE(report.estimable);
    CHECK_FALSE(assumption(report, "A5"));
}

TEST_CASE("treatment confined to a single sequence fails A1") {
    const auto design = CrossoverDesign::make({{"A", "B"}, {"A", "B"}, {"B", "C"}}, 1, 12);
    const auto report = check_estimability(design, BasisSpec::fourier(1, 12.0));
    CHECK_FALSE(report.estimable);
    CHECK_FALSE(assumption(report, "A1"));
}

TEST_CASE("estimable configurations have positive-definite Gram matrices") {
    for (const auto& spec : {BasisSpec::bspline(4, 2, 10.0), BasisSpec::fourier(2, 10.0)}) {
        const auto design = abba(3, 10);
        REQUIRE(check_estimability(design, spec).estimable);
        const auto X = assemble_design_matrix(design, spec);
        Eigen::MatrixXd scaled = X.values;
        for (int c = 0; c < scaled.cols(); ++c) scaled.col(c).normalize();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled.transpose() * scaled);
        CHECK(es.eigenvalues().minCoeff() > 1e-9);
    }
}

TEST_CASE("stacked constant column stays outside the expanded column space") {
    // Randomized version of the rank argument: if 1_n is not in colspace(A),
    // then 1_nL is not in colspace(A kron 1_L).
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 6, p = 3, L = 4;
        Eigen::MatrixXd A(n, p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j) A(i, j) = g(rng);
        const Eigen::VectorXd ones_n = Eigen::VectorXd::Ones(n);
        const double res_small =
            (A * A.colPivHouseholderQr().solve(ones_n) - ones_n).norm();
        if (res_small < 1e-6) continue;  // resample case: 1_n accidentally near span

        const Eigen::MatrixXd expanded = kron(A, Eigen::MatrixXd::Ones(L, 1));
        const Eigen::VectorXd ones_nL = Eigen::VectorXd::Ones(n * L);
        const double res_big =
            (expanded * expanded.colPivHouseholderQr().solve(ones_nL) - ones_nL).norm();
        CHECK(res_big > 1e-6);
    }
}

TEST_CASE("rank of a mixed Kronecker stack adds up") {
    // rank([D kron 1_L | B kron A]) = rank(D) + rank(B) * rank(A) when A has
    // full rank and excludes the constant vector.
    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 8, pd = 3, pb = 2, L = 5, q = 2;
        Eigen::MatrixXd D(n, pd), B(n, pb), A(L, q);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < pd; ++j) D(i, j) = coin(rng) ? 1.0 : 0.0;
            for (int j = 0; j < pb; ++j) B(i, j) = coin(rng) ? 1.0 : 0.0;
        }
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < q; ++j) A(i, j) = g(rng);
        A.colwise() -= A.rowwise().mean().eval();  // keep 1_L away from colspace(A)
        A.rowwise() -= A.colwise().mean().eval();

        if (numeric_rank(A) < q || numeric_rank(B) < pb || numeric_rank(D) < pd) continue;
        Eigen::MatrixXd stack(n * L, pd + pb * q);
        stack << kron(D, Eigen::MatrixXd::Ones(L, 1)), kron(B, A);
        CHECK(numeric_rank(stack) == pd + pb * q);
    }
}

TEST_CASE("Kronecker rank identity on design blocks") {
    for (int L : {6, 10}) {
        const auto design = abba(2, L);
        const auto blocks = build_indicators(design);
        const BasisMatrix phi = evaluate(BasisSpec::fourier(1, static_cast<double>(L)), design.times);
        const Eigen::MatrixXd ck = kron(blocks.carryover, phi.values);
        CHECK(numeric_rank(ck) == numeric_rank(blocks.carryover) * numeric_rank(phi.values));
    }
}

} // TEST_SUITE
