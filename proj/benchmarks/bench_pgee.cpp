#include <benchmark/benchmark.h>

#include "pgee/basis.hpp"
#include "pgee/correlation.hpp"
#include "pgee/simulate.hpp"

namespace {

void BM_BsplineEvaluate(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    std::vector<double> times(L);
    for (int k = 0; k < L; ++k) times[k] = k + 1.0;
    const pgee::BasisSpec spec = pgee::BasisSpec::bspline(8, 3, static_cast<double>(L));
    for (auto _ : state) {
        auto basis = pgee::evaluate(spec, times);
        benchmark::DoNotOptimize(basis.values.data());
    }
}
BENCHMARK(BM_BsplineEvaluate)->Arg(20)->Arg(100)->Arg(500);

void BM_BuildKroneckerR(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    pgee::CorrelationSpec spec;
    spec.kronecker = true;
    spec.between = pgee::CorrKind::exchangeable;
    spec.within = pgee::CorrKind::ar1;
    pgee::AlphaEstimate alpha;
    alpha.alpha = Eigen::Vector2d(0.3, 0.5);
    alpha.valid = true;
    for (auto _ : state) {
        auto R = pgee::build_R(spec, alpha, 2, L);
        benchmark::DoNotOptimize(R.data());
    }
}
BENCHMARK(BM_BuildKroneckerR)->Arg(20)->Arg(100);

void BM_FitSmoothModel(benchmark::State& state) {
    pgee::SimulationScenario sc;
    sc.L = static_cast<int>(state.range(0));
    sc.n_per_sequence = static_cast<int>(state.range(1));
    const Eigen::VectorXd y = pgee::generate_dataset(sc, 0);
    const pgee::GeeProblem pb =
        pgee::GeeProblem::from_design(sc.design(), pgee::smooth_model_spec(sc), y);
    for (auto _ : state) {
        auto fit = pgee::fit(pb);
        benchmark::DoNotOptimize(fit.beta.data());
    }
}
BENCHMARK(BM_FitSmoothModel)->Args({20, 10})->Args({50, 5});

} // namespace

BENCHMARK_MAIN();
