#include "pgee/glm.hpp"

#include <algorithm>
#include <cmath>

namespace pgee {

namespace {
constexpr double kMuEps = 1e-8;
}

std::string Family::name() const {
    switch (kind) {
        case FamilyKind::gaussian: return "gaussian";
        case FamilyKind::binomial: return "binomial";
        case FamilyKind::poisson: return "poisson";
    }
    return "?";
}

std::string Family::link_name() const {
    switch (kind) {
        case FamilyKind::gaussian: return "identity";
        case FamilyKind::binomial: return "logit";
        case FamilyKind::poisson: return "log";
    }
    return "?";
}

double Family::link(double mu) const {
    switch (kind) {
        case FamilyKind::gaussian: return mu;
        case FamilyKind::binomial: {
            const double m = std::clamp(mu, kMuEps, 1.0 - kMuEps);
            return std::log(m / (1.0 - m));
        }
        case FamilyKind::poisson: return std::log(std::max(mu, kMuEps));
    }
    return 0.0;
}

Family Family::parse(const std::string& name) {
    if (name == "gaussian" || name == "normal") return {FamilyKind::gaussian};
    if (name == "binomial") return {FamilyKind::binomial};
    if (name == "poisson") return {FamilyKind::poisson};
    throw ConfigError("unknown family: " + name);
}

LinkEval family_eval(const Family& family, const Eigen::VectorXd& eta) {
    const Eigen::Index n = eta.size();
    LinkEval ev;
    ev.mu.resize(n);
    ev.dmu_deta.resize(n);
    ev.var.resize(n);
    switch (family.kind) {
        case FamilyKind::gaussian:
            ev.mu = eta;
            ev.dmu_deta.setOnes();
            ev.var.setOnes();
            break;
        case FamilyKind::binomial:
            for (Eigen::Index i = 0; i < n; ++i) {
                double m = 1.0 / (1.0 + std::exp(-eta[i]));
                m = std::clamp(m, kMuEps, 1.0 - kMuEps);
                ev.mu[i] = m;
                ev.dmu_deta[i] = m * (1.0 - m);
                ev.var[i] = m * (1.0 - m);
            }
            break;
        case FamilyKind::poisson:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double m = std::max(std::exp(eta[i]), kMuEps);
                ev.mu[i] = m;
                ev.dmu_deta[i] = m;
                ev.var[i] = m;
            }
            break;
    }
    return ev;
}

ResidualBundle pearson_weighted(const Family& family, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& denom, double p_effective) {
    if (y.size() != mu.size() || y.size() != denom.size())
        throw DataShapeMismatch("pearson: length mismatch");
    const Eigen::Index n = y.size();
    if (p_effective >= static_cast<double>(n))
        throw DataShapeMismatch("pearson: p_effective must be < N");

    Eigen::VectorXd var(n);
    switch (family.kind) {
        case FamilyKind::gaussian: var.setOnes(); break;
        case FamilyKind::binomial:
            var = mu.array() * (1.0 - mu.array());
            break;
        case FamilyKind::poisson: var = mu; break;
    }
    var.array() /= denom.array();

    ResidualBundle rb;
    rb.pearson.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (var[i] < 1e-12) throw DegenerateVariance("variance below 1e-12 at observation " + std::to_string(i));
        rb.pearson[i] = (y[i] - mu[i]) / std::sqrt(var[i]);
    }
    rb.dispersion = rb.pearson.squaredNorm() / (static_cast<double>(n) - p_effective);
    return rb;
}

ResidualBundle pearson(const Family& family, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& mu, double p_effective) {
    return pearson_weighted(family, y, mu, Eigen::VectorXd::Ones(y.size()), p_effective);
}

} // namespace pgee
