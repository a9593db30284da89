#ifndef PGEE_LINALG_HPP
#define PGEE_LINALG_HPP

#include <Eigen/Dense>

namespace pgee {

/// Dense Kronecker product A (m x n) with B (p x q) -> (mp x nq).
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Numeric rank by column-pivoted QR. A diagonal entry of R counts toward
/// the rank when its magnitude exceeds tol_scale times the largest column
/// norm of the input.
int numeric_rank(const Eigen::MatrixXd& m, double tol_scale = 1e-9);

/// Compensated (Kahan) accumulator so reduction order does not leak into
/// correlation estimates.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Two-sided standard normal quantile for the usual band levels; falls back
/// to a Newton refinement for anything else.
double normal_quantile_two_sided(double level);

/// Standard normal upper-tail probability.
double normal_sf(double z);

} // namespace pgee

#endif
