#include "pgee/linalg.hpp"

#include <cmath>

namespace pgee {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

int numeric_rank(const Eigen::MatrixXd& m, double tol_scale) {
    if (m.size() == 0) return 0;
    double max_col_norm = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        max_col_norm = std::max(max_col_norm, m.col(j).norm());
    if (max_col_norm == 0.0) return 0;
    const double tol = tol_scale * max_col_norm;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    const auto& r = qr.matrixR();
    int rank = 0;
    const Eigen::Index k = std::min(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < k; ++i)
        if (std::abs(r(i, i)) > tol) ++rank;
    return rank;
}

double normal_quantile_two_sided(double level) {
    if (level == 0.90) return 1.6448536269514722;
    if (level == 0.95) return 1.959963984540054;
    if (level == 0.99) return 2.5758293035489004;
    // Newton on the tail probability, started from a rational approximation.
    double p = 0.5 * (1.0 + level);
    double t = std::sqrt(-2.0 * std::log(1.0 - p));
    double z = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    for (int it = 0; it < 50; ++it) {
        double f = 1.0 - normal_sf(z) - p;
        double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        if (pdf < 1e-300) break;
        double step = f / pdf;
        z -= step;
        if (std::abs(step) < 1e-12) break;
    }
    return z;
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

} // namespace pgee
