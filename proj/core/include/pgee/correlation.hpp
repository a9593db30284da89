#ifndef PGEE_CORRELATION_HPP
#define PGEE_CORRELATION_HPP

#include <string>

#include <Eigen/Dense>

#include "pgee/errors.hpp"

namespace pgee {

enum class CorrKind { independence, exchangeable, ar1 };

/// Working correlation over the PL observations of one unit, flattened
/// period-major. Plain structures act on the full PL vector; the kronecker
/// structure composes a P x P between-period block with an L x L
/// within-period block.
struct CorrelationSpec {
    bool kronecker = false;
    CorrKind structure = CorrKind::independence;  // plain structure
    CorrKind between = CorrKind::independence;    // kronecker only
    CorrKind within = CorrKind::independence;     // kronecker only

    int n_params() const;
    std::string name() const;
    static CorrelationSpec parse(const std::string& text);
};

struct AlphaEstimate {
    Eigen::VectorXd alpha;  // length = spec.n_params()
    bool valid = true;

    static AlphaEstimate zero(const CorrelationSpec& spec);
};

/// R(alpha), PL x PL; throws NotPositiveDefinite when the smallest eigenvalue
/// drops below 1e-10.
Eigen::MatrixXd build_R(const CorrelationSpec& spec, const AlphaEstimate& alpha,
                        int P, int L);

/// Closed-form moment update from Pearson residuals (units x PL, flattened
/// period-major), scaled by the dispersion. Estimates are clipped 1e-6 inside
/// their admissible intervals.
AlphaEstimate update_alpha(const Eigen::MatrixXd& residuals, double dispersion,
                           const CorrelationSpec& spec, int P, int L);

} // namespace pgee

#endif
