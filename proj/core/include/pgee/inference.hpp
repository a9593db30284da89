#ifndef PGEE_INFERENCE_HPP
#define PGEE_INFERENCE_HPP

#include <map>
#include <vector>

#include "pgee/solver.hpp"

namespace pgee {

/// Pointwise delta-method confidence band for a fitted curve.
struct CurveBand {
    std::vector<double> times;
    Eigen::VectorXd estimate;
    std::map<double, Eigen::VectorXd> half_widths;  // level -> per-point half width
};

/// Robust sandwich covariance of a block at the fitted state.
Eigen::MatrixXd sandwich(const GeeProblem& pb, const FitResult& fit, BlockRef block);

/// Band for the time smooth (block = time) or a carry-over smooth
/// (block = carry(c)), evaluated on `grid` using the fit's basis centering.
CurveBand curve_band(const GeeProblem& pb, const FitResult& fit, BlockRef block,
                     const std::vector<double>& grid,
                     const std::vector<double>& levels = {0.90, 0.95, 0.99});

struct WaldResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sided normal-reference Wald test of c' beta = 0.
WaldResult wald(const FitResult& fit, const Eigen::VectorXd& contrast);

} // namespace pgee

#endif
