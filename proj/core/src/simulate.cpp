#include "pgee/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>

#include "pgee/inference.hpp"
#include "pgee/linalg.hpp"
#include "pgee/tuning.hpp"

namespace pgee {

namespace {

constexpr double kZ95 = 1.959964;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Eigen::VectorXd centered_curve(int L, bool cosine) {
    Eigen::VectorXd f(L);
    for (int k = 1; k <= L; ++k) {
        const double w = 2.0 * M_PI * k / L;
        f[k - 1] = cosine ? std::cos(w) : std::sin(w);
    }
    f.array() -= f.mean();
    return f;
}

int worker_count(int replicates) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PGEE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) threads = v;
    }
    return std::clamp(threads, 1, std::max(1, replicates));
}

} // namespace

CrossoverDesign SimulationScenario::design() const {
    return CrossoverDesign::make({{"A", "B"}, {"B", "A"}}, n_per_sequence, L);
}

Eigen::VectorXd SimulationScenario::truth_time() const { return centered_curve(L, false); }
Eigen::VectorXd SimulationScenario::truth_carry_ab() const { return centered_curve(L, false); }
Eigen::VectorXd SimulationScenario::truth_carry_ba() const { return centered_curve(L, true); }

std::string model_name(ComparatorModel m) {
    switch (m) {
        case ComparatorModel::GeeMain: return "GEE-main";
        case ComparatorModel::GamTime: return "GAM-time";
        case ComparatorModel::GeeCarry: return "GEE-carry";
        case ComparatorModel::GeeInt: return "GEE-int";
        case ComparatorModel::GeeSmooth: return "GEE-smooth";
        case ComparatorModel::GeeSpline: return "GEE-spline";
    }
    return "?";
}

ComparatorModel parse_model(const std::string& name) {
    for (ComparatorModel m : {ComparatorModel::GeeMain, ComparatorModel::GamTime,
                              ComparatorModel::GeeCarry, ComparatorModel::GeeInt,
                              ComparatorModel::GeeSmooth, ComparatorModel::GeeSpline})
        if (model_name(m) == name) return m;
    throw ConfigError("unknown comparator model: " + name);
}

Eigen::VectorXd generate_dataset(const SimulationScenario& sc, int replicate_index) {
    const int L = sc.L;
    const int n = sc.n_per_sequence;
    const Eigen::VectorXd f = sc.truth_time();
    const Eigen::VectorXd f1 = sc.truth_carry_ab();
    const Eigen::VectorXd f2 = sc.truth_carry_ba();

    std::mt19937_64 rng(splitmix64(sc.seed ^ splitmix64(static_cast<std::uint64_t>(replicate_index))));
    std::normal_distribution<double> noise(0.0, 1.0);

    Eigen::VectorXd y(2 * n * 2 * L);
    Eigen::Index at = 0;
    for (int s = 0; s < 2; ++s) {            // 0 = AB, 1 = BA
        for (int u = 0; u < n; ++u) {
            for (int j = 0; j < 2; ++j) {    // period
                const bool treat_b = (s == 0) ? (j == 1) : (j == 0);
                for (int k = 0; k < L; ++k, ++at) {
                    double mean = sc.beta0 + sc.beta1 * (treat_b ? 1.0 : 0.0) +
                                  sc.beta2 * (j == 1 ? 1.0 : 0.0) + f[k];
                    if (j == 1) mean += (s == 0) ? f1[k] : f2[k];
                    y[at] = mean + sc.sigma * noise(rng);
                }
            }
        }
    }
    return y;
}

ModelSpec smooth_model_spec(const SimulationScenario& sc) {
    ModelSpec spec;
    spec.family = {FamilyKind::gaussian};
    spec.correlation.structure = CorrKind::exchangeable;
    spec.basis = sc.use_bspline_basis
                     ? BasisSpec::bspline(4, 3, static_cast<double>(sc.L))
                     : BasisSpec::fourier(1, static_cast<double>(sc.L));
    spec.lambda_time = 0.01;
    spec.lambda_carry = {0.01};
    return spec;
}

namespace {

GeeProblem parametric_problem(const SimulationScenario& sc, const Eigen::VectorXd& y,
                              ComparatorModel model) {
    const int L = sc.L;
    const int n = sc.n_per_sequence;
    const int rows = 2 * n * 2 * L;
    int cols = 3;
    if (model == ComparatorModel::GeeCarry) cols = 4;
    if (model == ComparatorModel::GeeInt) cols = 5;

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(rows, cols);
    const double z_mid = (L + 1.0) / 2.0;
    Eigen::Index at = 0;
    for (int s = 0; s < 2; ++s)
        for (int u = 0; u < n; ++u)
            for (int j = 0; j < 2; ++j) {
                const bool treat_b = (s == 0) ? (j == 1) : (j == 0);
                const bool carry_from_b = (s == 1 && j == 1);  // previous treatment was B
                for (int k = 0; k < L; ++k, ++at) {
                    X(at, 0) = 1.0;
                    X(at, 1) = treat_b ? 1.0 : 0.0;
                    X(at, 2) = j == 1 ? 1.0 : 0.0;
                    if (cols >= 4) X(at, 3) = carry_from_b ? 1.0 : 0.0;
                    if (cols >= 5) X(at, 4) = carry_from_b ? (k + 1.0 - z_mid) : 0.0;
                }
            }

    ModelSpec spec;
    spec.family = {FamilyKind::gaussian};
    spec.correlation.structure = CorrKind::exchangeable;
    return GeeProblem::parametric(std::move(X), y, 2 * n, 2, L, std::move(spec));
}

} // namespace

ReplicateRecord fit_comparator(const SimulationScenario& sc, ComparatorModel model,
                               const Eigen::VectorXd& y) {
    ReplicateRecord rec;
    try {
        FitResult f;
        switch (model) {
            case ComparatorModel::GeeMain:
            case ComparatorModel::GeeCarry:
            case ComparatorModel::GeeInt:
                f = fit(parametric_problem(sc, y, model));
                break;
            case ComparatorModel::GeeSmooth: {
                f = fit(GeeProblem::from_design(sc.design(), smooth_model_spec(sc), y));
                break;
            }
            case ComparatorModel::GeeSpline: {
                ModelSpec spec = smooth_model_spec(sc);
                spec.lambda_time = 0.0;
                spec.lambda_carry = {0.0};
                f = fit(GeeProblem::from_design(sc.design(), spec, y));
                break;
            }
            case ComparatorModel::GamTime: {
                // Time-adjusted comparator without carry-over: ridge-shrink the
                // carry blocks to zero and pick lambda_time by GCV.
                ModelSpec spec = smooth_model_spec(sc);
                spec.correlation = CorrelationSpec{};
                spec.penalty_order_carry = 0;
                spec.lambda_carry = {1e12};
                GeeProblem pb = GeeProblem::from_design(sc.design(), spec, y);
                double best = std::numeric_limits<double>::infinity();
                double best_lt = spec.lambda_time;
                for (double lt : TuningGrid::default_grid().lambda_values) {
                    try {
                        const GeeProblem cand = with_lambdas(pb, lt, spec.lambda_carry);
                        const FitResult cf = fit(cand);
                        if (!cf.converged) continue;
                        const double s = gcv(cand, cf);
                        if (s <= best) {
                            best = s;
                            best_lt = lt;
                        }
                    } catch (const Error&) {
                    }
                }
                f = fit(with_lambdas(pb, best_lt, spec.lambda_carry));
                break;
            }
        }
        if (!f.converged) return rec;
        rec.beta1_hat = f.beta[1];
        rec.se = std::sqrt(std::max(f.vcov_beta(1, 1), 0.0));
        rec.rmse = std::sqrt(std::max(f.dispersion, 0.0));
        rec.ok = true;
    } catch (const Error&) {
        rec.ok = false;
    }
    return rec;
}

SimulationSummary run_monte_carlo(const SimulationScenario& sc,
                                  const std::vector<ComparatorModel>& models) {
    if (models.empty()) throw ConfigError("run_monte_carlo needs at least one model");
    const int reps = sc.replicates;
    std::vector<std::vector<ReplicateRecord>> records(
        models.size(), std::vector<ReplicateRecord>(reps));

    const int threads = worker_count(reps);
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
                const Eigen::VectorXd y = generate_dataset(sc, r);
                for (std::size_t m = 0; m < models.size(); ++m)
                    records[m][r] = fit_comparator(sc, models[m], y);
            }
        });
    }
    for (auto& th : pool) th.join();

    SimulationSummary summary;
    summary.scenario = sc;
    for (std::size_t m = 0; m < models.size(); ++m) {
        ModelSummary ms;
        ms.model = models[m];
        KahanSum est, rmse;
        int covered = 0;
        for (const auto& rec : records[m]) {
            if (!rec.ok) {
                ++ms.failures;
                continue;
            }
            est.add(rec.beta1_hat);
            rmse.add(rec.rmse);
            if (std::abs(rec.beta1_hat - sc.beta1) <= kZ95 * rec.se) ++covered;
            ++ms.replicates_used;
        }
        if (ms.replicates_used > 0) {
            ms.mean_estimate = est.value() / ms.replicates_used;
            ms.rmse = rmse.value() / ms.replicates_used;
            ms.coverage = static_cast<double>(covered) / ms.replicates_used;
        }
        summary.models.push_back(ms);
    }
    return summary;
}

CurveRecovery curve_recovery(const SimulationScenario& sc, int replicates) {
    const CrossoverDesign design = sc.design();
    const ModelSpec spec = smooth_model_spec(sc);
    const Eigen::VectorXd truth_f = sc.truth_time();
    const Eigen::VectorXd truth_f1 = sc.truth_carry_ab();
    const Eigen::VectorXd truth_f2 = sc.truth_carry_ba();

    CurveRecovery out;
    KahanSum ise_f, ise_f1, ise_f2;
    for (int r = 0; r < replicates; ++r) {
        const Eigen::VectorXd y = generate_dataset(sc, r);
        try {
            const GeeProblem pb = GeeProblem::from_design(design, spec, y);
            const FitResult f = fit(pb);
            if (!f.converged) continue;
            const Eigen::MatrixXd phi = evaluate_at(pb.spec.basis, design.times, pb.basis_offsets);
            // Pair order is lexicographic: A->B first, then B->A.
            ise_f.add((phi * f.theta - truth_f).squaredNorm() / sc.L);
            ise_f1.add((phi * f.theta_c[0] - truth_f1).squaredNorm() / sc.L);
            ise_f2.add((phi * f.theta_c[1] - truth_f2).squaredNorm() / sc.L);
            ++out.replicates_used;
        } catch (const Error&) {
        }
    }
    if (out.replicates_used > 0) {
        out.ise_time = ise_f.value() / out.replicates_used;
        out.ise_carry_ab = ise_f1.value() / out.replicates_used;
        out.ise_carry_ba = ise_f2.value() / out.replicates_used;
    }
    return out;
}

} // namespace pgee
