#ifndef PGEE_SIMULATE_HPP
#define PGEE_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgee/solver.hpp"

namespace pgee {

/// AB/BA scenario with sinusoidal time and carry-over effects; Z = 1..L.
struct SimulationScenario {
    double beta0 = 0.0;
    double beta1 = 1.0;
    double beta2 = 0.2;
    double sigma = 1.0;
    int L = 20;
    int n_per_sequence = 10;
    int replicates = 200;
    std::uint64_t seed = 20240101;
    /// Basis used by the smooth models; Fourier K=1 nests the truth, the
    /// cubic B-spline preset approximates it.
    bool use_bspline_basis = false;

    CrossoverDesign design() const;
    /// Centered true curves on the Z grid: time, carry A->B, carry B->A.
    Eigen::VectorXd truth_time() const;
    Eigen::VectorXd truth_carry_ab() const;
    Eigen::VectorXd truth_carry_ba() const;
};

enum class ComparatorModel { GeeMain, GamTime, GeeCarry, GeeInt, GeeSmooth, GeeSpline };

std::string model_name(ComparatorModel m);
ComparatorModel parse_model(const std::string& name);

/// Response vector in design row order (sequence, unit, period, time).
Eigen::VectorXd generate_dataset(const SimulationScenario& scenario, int replicate_index);

struct ReplicateRecord {
    double beta1_hat = 0.0;
    double se = 0.0;
    double rmse = 0.0;  // residual sigma-hat
    bool ok = false;
};

struct ModelSummary {
    ComparatorModel model;
    double mean_estimate = 0.0;
    double coverage = 0.0;  // nominal 95%
    double rmse = 0.0;
    int replicates_used = 0;
    int failures = 0;
};

struct SimulationSummary {
    SimulationScenario scenario;
    std::vector<ModelSummary> models;
};

/// Fit one comparator model to one generated dataset.
ReplicateRecord fit_comparator(const SimulationScenario& scenario, ComparatorModel model,
                               const Eigen::VectorXd& y);

/// Parallel over replicates (bounded by PGEE_THREADS); aggregation order is
/// fixed so results are deterministic.
SimulationSummary run_monte_carlo(const SimulationScenario& scenario,
                                  const std::vector<ComparatorModel>& models);

struct CurveRecovery {
    double ise_time = 0.0;
    double ise_carry_ab = 0.0;
    double ise_carry_ba = 0.0;
    int replicates_used = 0;
};

/// Mean integrated squared error of the three estimated curves under the
/// full penalized model.
CurveRecovery curve_recovery(const SimulationScenario& scenario, int replicates);

/// The fully specified penalized model for this scenario (exchangeable
/// working correlation).
ModelSpec smooth_model_spec(const SimulationScenario& scenario);

} // namespace pgee

#endif
