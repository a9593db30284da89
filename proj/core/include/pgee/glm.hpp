#ifndef PGEE_GLM_HPP
#define PGEE_GLM_HPP

#include <string>

#include <Eigen/Dense>

#include "pgee/errors.hpp"

namespace pgee {

enum class FamilyKind { gaussian, binomial, poisson };

/// Exponential family with its canonical link: gaussian/identity,
/// binomial/logit, poisson/log.
struct Family {
    FamilyKind kind = FamilyKind::gaussian;

    std::string name() const;
    std::string link_name() const;
    /// Link applied to a single mean, used to initialize the intercept.
    double link(double mu) const;

    static Family parse(const std::string& name);
};

struct LinkEval {
    Eigen::VectorXd mu;
    Eigen::VectorXd dmu_deta;
    Eigen::VectorXd var;  // V(mu)
};

/// Inverse link, its derivative, and the variance function, elementwise.
/// Binomial means are clamped to [1e-8, 1-1e-8] and poisson means to
/// >= 1e-8 so variances stay positive.
LinkEval family_eval(const Family& family, const Eigen::VectorXd& eta);

struct ResidualBundle {
    Eigen::VectorXd pearson;
    double dispersion = 0.0;  // phi-hat
};

/// Pearson residuals (y - mu)/sqrt(V(mu)) and the moment dispersion estimate
/// sum(r^2)/(N - p_effective). p_effective may be fractional (penalized
/// blocks contribute their effective degrees of freedom).
ResidualBundle pearson(const Family& family, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& mu, double p_effective);

/// Weighted variant: var_scale divides V(mu) per observation (binomial
/// denominators).
ResidualBundle pearson_weighted(const Family& family, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& denom, double p_effective);

} // namespace pgee

#endif
