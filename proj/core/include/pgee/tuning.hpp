#ifndef PGEE_TUNING_HPP
#define PGEE_TUNING_HPP

#include <map>
#include <string>
#include <vector>

#include "pgee/solver.hpp"

namespace pgee {

struct TuningGrid {
    std::vector<double> lambda_values;  // sorted ascending, unique

    /// {0, 0.01, 0.1, 1, 10, 100, ..., 1e9}
    static TuningGrid default_grid();
    double median() const;
};

enum class Criterion { qic, loco_cv, gcv };

Criterion parse_criterion(const std::string& name);
std::string criterion_name(Criterion c);

struct TuningEntry {
    double lambda_time = 0.0;
    std::vector<double> lambda_carry;
    double score = 0.0;
    bool converged = true;
};

struct TuningResult {
    Criterion criterion = Criterion::qic;
    std::vector<TuningEntry> table;
    TuningEntry selected;
    std::map<std::string, double> per_effect_lambda;  // pair label -> lambda
};

/// Quasi-likelihood at unit dispersion for the problem's family.
double quasi_likelihood(const GeeProblem& pb, const Eigen::VectorXd& mu);

/// QIC = -2Q + 2 tr(Omega_I Vr) with Omega_I the model-based independence
/// information for beta and Vr its robust covariance.
double qic(const GeeProblem& pb, const FitResult& fit);

/// Leave-one-cluster-out prediction error at the problem's lambda settings.
double loco_cv_score(const GeeProblem& pb);

/// Gaussian-only generalized cross-validation with the linear smoother trace.
double gcv(const GeeProblem& pb, const FitResult& fit);

/// Copy of the problem with new smoothing parameters.
GeeProblem with_lambdas(const GeeProblem& pb, double lambda_time,
                        const std::vector<double>& lambda_carry);

/// Coordinate-wise search: lambda_time first (carry lambdas held at the grid
/// median), then each carry-over lambda in sequence. Ties prefer larger
/// lambda. `sweeps` repeats the carry-over pass.
TuningResult select_lambdas(const GeeProblem& pb, const TuningGrid& grid,
                            Criterion criterion, int sweeps = 1);

} // namespace pgee

#endif
