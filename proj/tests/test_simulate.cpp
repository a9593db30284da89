#include <doctest.h>

#include <cmath>

#include "pgee/simulate.hpp"

using namespace pgee;

TEST_SUITE("simulate") {

TEST_CASE("truth curves are centered sinusoids") {
    SimulationScenario sc;
    sc.L = 20;
    const Eigen::VectorXd f = sc.truth_time();
    const Eigen::VectorXd f1 = sc.truth_carry_ab();
    const Eigen::VectorXd f2 = sc.truth_carry_ba();
    CHECK(std::abs(f.mean()) < 1e-14);
    CHECK(std::abs(f1.mean()) < 1e-14);
    CHECK(std::abs(f2.mean()) < 1e-14);
    CHECK((f - f1).lpNorm<Eigen::Infinity>() == 0.0);
    // entries are sin/cos at Z = 1..L minus the grid mean of the raw curve
    double sin_mean = 0.0, cos_mean = 0.0;
    for (int k = 1; k <= sc.L; ++k) {
        sin_mean += std::sin(2.0 * M_PI * k / sc.L) / sc.L;
        cos_mean += std::cos(2.0 * M_PI * k / sc.L) / sc.L;
    }
    for (int k = 1; k <= sc.L; ++k) {
        const double w = 2.0 * M_PI * k / sc.L;
        CHECK(f[k - 1] == doctest::Approx(std::sin(w) - sin_mean).epsilon(1e-12));
        CHECK(f2[k - 1] == doctest::Approx(std::cos(w) - cos_mean).epsilon(1e-12));
    }
}

TEST_CASE("noise-free period 1 equals the time curve") {
    SimulationScenario sc;
    sc.beta0 = sc.beta1 = sc.beta2 = 0.0;
    sc.sigma = 0.0;
    sc.L = 12;
    sc.n_per_sequence = 1;
    const Eigen::VectorXd y = generate_dataset(sc, 0);
    const Eigen::VectorXd f = sc.truth_time();
    // BA sequence, period 1: treatment B so beta1 would apply, but beta1 = 0
    CHECK((y.segment(0, sc.L) - f).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK((y.segment(2 * sc.L, sc.L) - f).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("noise-free AB period 2 isolates the carry-over curve") {
    SimulationScenario sc;
    sc.beta0 = 0.3;
    sc.beta1 = 1.0;
    sc.beta2 = 0.2;
    sc.sigma = 0.0;
    sc.L = 12;
    sc.n_per_sequence = 1;
    const Eigen::VectorXd y = generate_dataset(sc, 0);
    const Eigen::VectorXd f = sc.truth_time();
    const Eigen::VectorXd f1 = sc.truth_carry_ab();
    // AB sequence period 2: treatment B, period-2 indicator on
    const Eigen::VectorXd seg = y.segment(sc.L, sc.L);
    for (int k = 0; k < sc.L; ++k)
        CHECK(seg[k] - f[k] - sc.beta0 - sc.beta1 - sc.beta2 ==
              doctest::Approx(f1[k]).epsilon(1e-12));
}

TEST_CASE("population mean over a period is the parametric part") {
    SimulationScenario sc;
    sc.beta0 = 2.0;
    sc.beta1 = -1.0;
    sc.beta2 = 0.5;
    sc.sigma = 0.0;
    sc.L = 16;
    sc.n_per_sequence = 1;
    const Eigen::VectorXd y = generate_dataset(sc, 0);
    // BA sequence period 2: treatment A (beta1 off), period 2 on, carry B->A on
    const double mean = y.segment(3 * sc.L, sc.L).mean();
    CHECK(mean == doctest::Approx(sc.beta0 + sc.beta2).epsilon(1e-12));
}

TEST_CASE("replicate streams are deterministic and distinct") {
    SimulationScenario sc;
    sc.L = 10;
    sc.n_per_sequence = 2;
    const Eigen::VectorXd a = generate_dataset(sc, 5);
    const Eigen::VectorXd b = generate_dataset(sc, 5);
    const Eigen::VectorXd c = generate_dataset(sc, 6);
    CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a - c).lpNorm<Eigen::Infinity>() > 1e-3);
}

TEST_CASE("model names round-trip") {
    for (ComparatorModel m : {ComparatorModel::GeeMain, ComparatorModel::GamTime,
                              ComparatorModel::GeeCarry, ComparatorModel::GeeInt,
                              ComparatorModel::GeeSmooth, ComparatorModel::GeeSpline})
        CHECK(parse_model(model_name(m)) == m);
    CHECK_THROWS_AS(parse_model("GEE-magic"), ConfigError);
}

TEST_CASE("every comparator fits one replicate") {
    SimulationScenario sc;
    sc.L = 20;
    sc.n_per_sequence = 5;
    const Eigen::VectorXd y = generate_dataset(sc, 0);
    for (ComparatorModel m : {ComparatorModel::GeeMain, ComparatorModel::GamTime,
                              ComparatorModel::GeeCarry, ComparatorModel::GeeInt,
                              ComparatorModel::GeeSmooth, ComparatorModel::GeeSpline}) {
        const ReplicateRecord rec = fit_comparator(sc, m, y);
        CHECK(rec.ok);
        CHECK(rec.se > 0.0);
        CHECK(std::abs(rec.beta1_hat - sc.beta1) < 1.0);
    }
}

TEST_CASE("estimates are unbiased for every model on a balanced design") {
    SimulationScenario sc;
    sc.L = 20;
    sc.n_per_sequence = 10;
    sc.replicates = 40;
    const auto models = {ComparatorModel::GeeMain, ComparatorModel::GeeCarry,
                         ComparatorModel::GeeSmooth};
    const SimulationSummary summary = run_monte_carlo(sc, models);
    for (const auto& ms : summary.models) {
        REQUIRE(ms.replicates_used > 30);
        const double se_of_mean = ms.rmse > 0
            ? 1.5 * ms.rmse / std::sqrt(static_cast<double>(ms.replicates_used))
            : 0.3;
        CHECK(std::abs(ms.mean_estimate - sc.beta1) < 3 * std::max(se_of_mean, 0.05));
    }
}

TEST_CASE("summaries are deterministic across runs and thread counts") {
    SimulationScenario sc;
    sc.L = 10;
    sc.n_per_sequence = 3;
    sc.replicates = 12;
    const auto models = {ComparatorModel::GeeSmooth, ComparatorModel::GeeMain};
    const SimulationSummary a = run_monte_carlo(sc, models);
    const SimulationSummary b = run_monte_carlo(sc, models);
    for (std::size_t m = 0; m < a.models.size(); ++m) {
        CHECK(a.models[m].mean_estimate == b.models[m].mean_estimate);
        CHECK(a.models[m].coverage == b.models[m].coverage);
        CHECK(a.models[m].rmse == b.models[m].rmse);
    }
}

TEST_CASE("time curve is easier to recover than carry-over curves") {
    SimulationScenario sc;
    sc.L = 20;
    sc.n_per_sequence = 10;
    const CurveRecovery rec = curve_recovery(sc, 10);
    REQUIRE(rec.replicates_used > 5);
    CHECK(rec.ise_time < rec.ise_carry_ab);
    CHECK(rec.ise_time < rec.ise_carry_ba);
}

TEST_CASE("noise-free unpenalized Fourier fit interpolates the truth") {
    SimulationScenario sc;
    sc.sigma = 0.0;
    sc.L = 20;
    sc.n_per_sequence = 2;
    ModelSpec spec = smooth_model_spec(sc);
    spec.lambda_time = 0.0;
    spec.lambda_carry = {0.0};
    spec.tol = 1e-12;
    spec.max_iter = 5000;
    const Eigen::VectorXd y = generate_dataset(sc, 0);
    GeeProblem pb = GeeProblem::from_design(sc.design(), spec, y);
    const FitResult f = fit(pb);
    REQUIRE(f.converged);
    const Eigen::MatrixXd phi = evaluate_at(pb.spec.basis, sc.design().times, pb.basis_offsets);
    CHECK((phi * f.theta - sc.truth_time()).squaredNorm() / sc.L < 1e-10);
    CHECK((phi * f.theta_c[0] - sc.truth_carry_ab()).squaredNorm() / sc.L < 1e-10);
    CHECK((phi * f.theta_c[1] - sc.truth_carry_ba()).squaredNorm() / sc.L < 1e-10);
}

TEST_CASE("failures are counted, not silently dropped") {
    SimulationScenario sc;
    sc.L = 10;
    sc.n_per_sequence = 2;
    sc.replicates = 5;
    const SimulationSummary s = run_monte_carlo(sc, {ComparatorModel::GeeSmooth});
    CHECK(s.models[0].replicates_used + s.models[0].failures == sc.replicates);
}

} // TEST_SUITE
