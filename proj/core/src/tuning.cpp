#include "pgee/tuning.hpp"

#include <cmath>
#include <limits>

namespace pgee {

TuningGrid TuningGrid::default_grid() {
    TuningGrid g;
    g.lambda_values = {0.0, 0.01, 0.1, 1.0, 10.0};
    for (int e = 2; e <= 9; ++e) g.lambda_values.push_back(std::pow(10.0, e));
    return g;
}

double TuningGrid::median() const {
    if (lambda_values.empty()) throw ConfigError("empty tuning grid");
    return lambda_values[lambda_values.size() / 2];
}

Criterion parse_criterion(const std::string& name) {
    if (name == "qic") return Criterion::qic;
    if (name == "loco" || name == "loco_cv" || name == "cv") return Criterion::loco_cv;
    if (name == "gcv") return Criterion::gcv;
    throw ConfigError("unknown tuning criterion: " + name);
}

std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::qic: return "qic";
        case Criterion::loco_cv: return "loco_cv";
        case Criterion::gcv: return "gcv";
    }
    return "?";
}

double quasi_likelihood(const GeeProblem& pb, const Eigen::VectorXd& mu) {
    double q = 0.0;
    switch (pb.spec.family.kind) {
        case FamilyKind::gaussian:
            q = -0.5 * (pb.y - mu).squaredNorm();
            break;
        case FamilyKind::binomial:
            for (Eigen::Index i = 0; i < pb.y.size(); ++i)
                q += pb.denom[i] * (pb.y[i] * std::log(mu[i]) + (1.0 - pb.y[i]) * std::log(1.0 - mu[i]));
            break;
        case FamilyKind::poisson:
            for (Eigen::Index i = 0; i < pb.y.size(); ++i)
                q += pb.y[i] * std::log(mu[i]) - mu[i];
            break;
    }
    if (!std::isfinite(q)) throw NonFiniteQuasiLikelihood("quasi-likelihood is not finite");
    return q;
}

double qic(const GeeProblem& pb, const FitResult& fit) {
    const double q = quasi_likelihood(pb, fit.fitted_mu);
    GeeProblem indep = pb;
    indep.spec.correlation = CorrelationSpec{};  // independence
    const AlphaEstimate a0 = AlphaEstimate::zero(indep.spec.correlation);
    const Eigen::MatrixXd omega =
        block_information(indep, fit.full_params(), a0, BlockRef::beta());
    const double trace_term = (omega * fit.vcov_beta).trace();
    const double out = -2.0 * q + 2.0 * trace_term;
    if (!std::isfinite(out)) throw NonFiniteQuasiLikelihood("QIC is not finite");
    return out;
}

double loco_cv_score(const GeeProblem& pb) {
    if (pb.n_units < 3) throw InsufficientData("leave-one-cluster-out needs at least 3 units");
    const int PL = pb.cluster_size();
    double score = 0.0;
    for (int leave = 0; leave < pb.n_units; ++leave) {
        GeeProblem sub = pb;
        sub.n_units = pb.n_units - 1;
        sub.X.resize(static_cast<Eigen::Index>(sub.n_units) * PL, pb.X.cols());
        sub.y.resize(sub.X.rows());
        sub.denom.resize(sub.X.rows());
        Eigen::Index at = 0;
        for (int i = 0; i < pb.n_units; ++i) {
            if (i == leave) continue;
            sub.X.middleRows(at, PL) = pb.X.middleRows(static_cast<Eigen::Index>(i) * PL, PL);
            sub.y.segment(at, PL) = pb.y.segment(static_cast<Eigen::Index>(i) * PL, PL);
            sub.denom.segment(at, PL) = pb.denom.segment(static_cast<Eigen::Index>(i) * PL, PL);
            at += PL;
        }
        const FitResult f = fit(sub);
        if (!f.converged) return std::numeric_limits<double>::infinity();
        const Eigen::VectorXd eta =
            pb.X.middleRows(static_cast<Eigen::Index>(leave) * PL, PL) * f.full_params();
        const Eigen::VectorXd mu = family_eval(pb.spec.family, eta).mu;
        score += (pb.y.segment(static_cast<Eigen::Index>(leave) * PL, PL) - mu).squaredNorm();
    }
    return score;
}

double gcv(const GeeProblem& pb, const FitResult& fit) {
    if (pb.spec.family.kind != FamilyKind::gaussian)
        throw Error("GCV requires the gaussian family");
    const double n = static_cast<double>(pb.n_obs());
    const Eigen::VectorXd params = fit.full_params();

    // Full-parameter working information sum B_i' R^-1 B_i.
    const Eigen::MatrixXd R = build_R(pb.spec.correlation, fit.alpha, pb.P, pb.L);
    const Eigen::MatrixXd r_inv =
        R.llt().solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
    const int q = pb.n_params();
    const int PL = pb.cluster_size();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(q, q);
    for (int i = 0; i < pb.n_units; ++i) {
        const Eigen::MatrixXd Xi = pb.X.middleRows(static_cast<Eigen::Index>(i) * PL, PL);
        info.noalias() += Xi.transpose() * r_inv * Xi;
    }

    Eigen::MatrixXd lambda_full = Eigen::MatrixXd::Zero(q, q);
    if (pb.d > 0) {
        lambda_full.block(pb.p_beta, pb.p_beta, pb.d, pb.d) =
            pb.spec.lambda_time * pb.penalty_time;
        for (int c = 0; c < pb.n_carry; ++c) {
            const int s = pb.block_start(BlockRef::carry(c));
            lambda_full.block(s, s, pb.d, pb.d) =
                pb.block_lambda(BlockRef::carry(c)) * pb.penalty_carry;
        }
    }
    const double edf = (info + lambda_full).ldlt().solve(info).trace();
    if (edf >= n) throw EffectiveDofTooLarge("smoother trace >= number of observations");
    const double rss = (pb.y - fit.fitted_mu).squaredNorm();
    return rss / std::pow(1.0 - edf / n, 2.0);
}

GeeProblem with_lambdas(const GeeProblem& pb, double lambda_time,
                        const std::vector<double>& lambda_carry) {
    GeeProblem out = pb;
    out.spec.lambda_time = lambda_time;
    out.spec.lambda_carry = lambda_carry;
    return out;
}

namespace {

double score_at(const GeeProblem& pb, Criterion criterion, double lt,
                const std::vector<double>& lc, bool& converged) {
    const GeeProblem cand = with_lambdas(pb, lt, lc);
    converged = true;
    try {
        if (criterion == Criterion::loco_cv) {
            const double s = loco_cv_score(cand);
            converged = std::isfinite(s);
            return s;
        }
        const FitResult f = fit(cand);
        if (!f.converged) {
            converged = false;
            return std::numeric_limits<double>::infinity();
        }
        return criterion == Criterion::qic ? qic(cand, f) : gcv(cand, f);
    } catch (const Error&) {
        converged = false;
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace

TuningResult select_lambdas(const GeeProblem& pb, const TuningGrid& grid,
                            Criterion criterion, int sweeps) {
    if (grid.lambda_values.empty()) throw ConfigError("empty tuning grid");
    TuningResult result;
    result.criterion = criterion;

    double best_lt = grid.median();
    std::vector<double> best_lc(pb.n_carry, grid.median());
    double best_score = std::numeric_limits<double>::infinity();

    auto try_point = [&](double lt, const std::vector<double>& lc) {
        bool conv = true;
        const double s = score_at(pb, criterion, lt, lc, conv);
        result.table.push_back({lt, lc, s, conv});
        // Ties prefer larger lambda; the grid is swept ascending.
        if (s <= best_score) {
            best_score = s;
            best_lt = lt;
            best_lc = lc;
        }
    };

    for (double lt : grid.lambda_values) try_point(lt, best_lc);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int c = 0; c < pb.n_carry; ++c) {
            for (double l : grid.lambda_values) {
                std::vector<double> lc = best_lc;
                lc[c] = l;
                try_point(best_lt, lc);
            }
        }
    }

    result.selected = {best_lt, best_lc, best_score, std::isfinite(best_score)};
    for (int c = 0; c < pb.n_carry; ++c)
        result.per_effect_lambda[pb.pairs.empty() ? "carry" + std::to_string(c)
                                                  : pb.pairs[c].label()] = best_lc[c];
    return result;
}

} // namespace pgee
