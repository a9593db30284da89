#include "pgee/inference.hpp"

#include <cmath>

#include "pgee/linalg.hpp"

namespace pgee {

Eigen::MatrixXd sandwich(const GeeProblem& pb, const FitResult& fit, BlockRef block) {
    return sandwich_cov(pb, fit.full_params(), fit.alpha, block);
}

CurveBand curve_band(const GeeProblem& pb, const FitResult& fit, BlockRef block,
                     const std::vector<double>& grid,
                     const std::vector<double>& levels) {
    if (block.kind == BlockRef::Kind::beta)
        throw Error("curve_band expects the time or a carry-over block");
    if (pb.d == 0) throw Error("model has no functional block");

    const Eigen::MatrixXd phi = evaluate_at(pb.spec.basis, grid, pb.basis_offsets);
    const Eigen::VectorXd& coef =
        block.kind == BlockRef::Kind::time ? fit.theta : fit.theta_c.at(block.index);
    const Eigen::MatrixXd& cov =
        block.kind == BlockRef::Kind::time ? fit.vcov_theta : fit.vcov_theta_c.at(block.index);

    CurveBand band;
    band.times = grid;
    band.estimate = phi * coef;
    const Eigen::VectorXd se = (phi * cov * phi.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt();
    for (double level : levels)
        band.half_widths[level] = normal_quantile_two_sided(level) * se;
    return band;
}

WaldResult wald(const FitResult& fit, const Eigen::VectorXd& contrast) {
    if (contrast.size() != fit.beta.size())
        throw DataShapeMismatch("contrast length != beta length");
    const double var = contrast.dot(fit.vcov_beta * contrast);
    if (var <= 0.0) throw ZeroVariance("contrast has zero variance");
    WaldResult w;
    w.statistic = contrast.dot(fit.beta) / std::sqrt(var);
    w.p_value = 2.0 * normal_sf(std::abs(w.statistic));
    return w;
}

} // namespace pgee
