#include "pgee/solver.hpp"

#include <cmath>

namespace pgee {

namespace {

int resolve_order(int requested, const BasisSpec& basis) {
    return requested >= 0 ? requested : default_penalty_order(basis);
}

struct LinkState {
    Eigen::VectorXd mu, dmu, avar;  // avar = V(mu)/denom
};

LinkState link_state(const GeeProblem& pb, const Eigen::VectorXd& params) {
    const Eigen::VectorXd eta = pb.X * params;
    LinkEval ev = family_eval(pb.spec.family, eta);
    LinkState st;
    st.mu = std::move(ev.mu);
    st.dmu = std::move(ev.dmu_deta);
    st.avar = ev.var.array() / pb.denom.array();
    return st;
}

double pearson_chi2(const GeeProblem& pb, const Eigen::VectorXd& params) {
    const LinkState st = link_state(pb, params);
    return ((pb.y - st.mu).array().square() / st.avar.array()).sum();
}

/// Accumulate G = sum D^T V^-1 D and g = sum D^T V^-1 r over units for a
/// column range. V_i = A^1/2 R A^1/2 as in the estimating equations.
void accumulate_range(const GeeProblem& pb, int start, int nb,
                      const Eigen::VectorXd& params, const Eigen::MatrixXd& r_inv,
                      Eigen::MatrixXd& G, Eigen::VectorXd& g,
                      Eigen::MatrixXd* meat = nullptr) {
    const int PL = pb.cluster_size();
    const LinkState st = link_state(pb, params);

    G.setZero(nb, nb);
    g.setZero(nb);
    if (meat) meat->setZero(nb, nb);

    for (int i = 0; i < pb.n_units; ++i) {
        const int r0 = i * PL;
        const Eigen::VectorXd a_isqrt = st.avar.segment(r0, PL).cwiseSqrt().cwiseInverse();
        // B = A^-1/2 D with D = diag(dmu) X_block
        Eigen::MatrixXd B = (a_isqrt.array() * st.dmu.segment(r0, PL).array()).matrix().asDiagonal() *
                            pb.X.block(r0, start, PL, nb);
        const Eigen::VectorXd rs = a_isqrt.cwiseProduct(pb.y.segment(r0, PL) - st.mu.segment(r0, PL));
        const Eigen::MatrixXd RinvB = r_inv * B;
        G.noalias() += B.transpose() * RinvB;
        const Eigen::VectorXd score_i = RinvB.transpose() * rs;
        g.noalias() += score_i;
        if (meat) meat->noalias() += score_i * score_i.transpose();
    }
}

void accumulate_block(const GeeProblem& pb, BlockRef block,
                      const Eigen::VectorXd& params, const Eigen::MatrixXd& r_inv,
                      Eigen::MatrixXd& G, Eigen::VectorXd& g,
                      Eigen::MatrixXd* meat = nullptr) {
    accumulate_range(pb, pb.block_start(block), pb.block_size(block), params, r_inv, G, g, meat);
}

/// Block-diagonal penalty over the full parameter vector.
Eigen::MatrixXd full_penalty(const GeeProblem& pb) {
    const int q = pb.n_params();
    Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(q, q);
    if (pb.d > 0) {
        const int ts = pb.block_start(BlockRef::time());
        pen.block(ts, ts, pb.d, pb.d) = pb.block_penalty(BlockRef::time());
        for (int c = 0; c < pb.n_carry; ++c) {
            const int cs = pb.block_start(BlockRef::carry(c));
            pen.block(cs, cs, pb.d, pb.d) = pb.block_penalty(BlockRef::carry(c));
        }
    }
    return pen;
}

Eigen::MatrixXd r_inverse(const GeeProblem& pb, const AlphaEstimate& alpha);

/// Joint sandwich over all parameters; per-block covariances are the
/// corresponding diagonal sub-blocks, so cross-block correlation between the
/// time and carry-over smooths is accounted for.
Eigen::MatrixXd joint_sandwich(const GeeProblem& pb, const Eigen::VectorXd& params,
                               const AlphaEstimate& alpha) {
    const Eigen::MatrixXd r_inv = r_inverse(pb, alpha);
    const int q = pb.n_params();
    Eigen::MatrixXd G, meat;
    Eigen::VectorXd g;
    accumulate_range(pb, 0, q, params, r_inv, G, g, &meat);
    G += full_penalty(pb);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw SingularBread("sandwich bread is singular");
    const Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(q, q));
    if (!bread.allFinite()) throw SingularBread("sandwich bread is singular");
    // K/(K-1) inflation of the empirical meat; the raw outer-product estimator
    // is biased low with few clusters.
    const double correction =
        pb.n_units > 1 ? static_cast<double>(pb.n_units) / (pb.n_units - 1) : 1.0;
    Eigen::MatrixXd cov = correction * bread * meat * bread;
    return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd r_inverse(const GeeProblem& pb, const AlphaEstimate& alpha) {
    const Eigen::MatrixXd R = build_R(pb.spec.correlation, alpha, pb.P, pb.L);
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("working correlation factorization failed");
    return llt.solve(Eigen::MatrixXd::Identity(R.rows(), R.cols()));
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& G, const Eigen::VectorXd& g) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("block normal matrix factorization failed");
    const Eigen::VectorXd x = ldlt.solve(g);
    const double scale = G.norm() * std::max(1.0, x.norm()) + g.norm();
    if (!x.allFinite() || (G * x - g).norm() > 1e-6 * (scale + 1e-300))
        throw SingularSystem("block normal matrix is numerically singular");
    return x;
}

} // namespace

Eigen::MatrixXd make_penalty(int d, int order) {
    if (d == 0) return Eigen::MatrixXd();
    if (order == 0) return Eigen::MatrixXd::Identity(d, d);
    if (order != 2) throw Error("penalty order must be 0 or 2");
    if (d < 3) throw PenaltyOrderTooHigh("second-difference penalty needs dim >= 3");
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(d - 2, d);
    for (int i = 0; i < d - 2; ++i) {
        d2(i, i) = 1.0;
        d2(i, i + 1) = -2.0;
        d2(i, i + 2) = 1.0;
    }
    return d2.transpose() * d2;
}

int GeeProblem::block_start(BlockRef b) const {
    switch (b.kind) {
        case BlockRef::Kind::beta: return 0;
        case BlockRef::Kind::time: return p_beta;
        case BlockRef::Kind::carry: return p_beta + d * (1 + b.index);
    }
    return 0;
}

int GeeProblem::block_size(BlockRef b) const {
    return b.kind == BlockRef::Kind::beta ? p_beta : d;
}

double GeeProblem::block_lambda(BlockRef b) const {
    switch (b.kind) {
        case BlockRef::Kind::beta: return 0.0;
        case BlockRef::Kind::time: return spec.lambda_time;
        case BlockRef::Kind::carry: {
            if (spec.lambda_carry.empty()) return 0.0;
            if (spec.lambda_carry.size() == 1) return spec.lambda_carry[0];
            if (b.index >= static_cast<int>(spec.lambda_carry.size()))
                throw DataShapeMismatch("lambda_carry shorter than number of carry-over effects");
            return spec.lambda_carry[b.index];
        }
    }
    return 0.0;
}

Eigen::MatrixXd GeeProblem::block_penalty(BlockRef b) const {
    const int nb = block_size(b);
    switch (b.kind) {
        case BlockRef::Kind::beta: return Eigen::MatrixXd::Zero(nb, nb);
        case BlockRef::Kind::time: return block_lambda(b) * penalty_time;
        case BlockRef::Kind::carry: return block_lambda(b) * penalty_carry;
    }
    return Eigen::MatrixXd::Zero(nb, nb);
}

GeeProblem GeeProblem::from_design(const CrossoverDesign& design, const ModelSpec& spec_in,
                                   Eigen::VectorXd y, Eigen::VectorXd denom,
                                   bool include_carryover) {
    design.validate();
    ModelSpec spec = spec_in;
    spec.basis.t_domain = design.t_domain;

    const EstimabilityReport report = check_estimability(design, spec.basis);
    if (!report.estimable && !spec.allow_rank_deficient) {
        std::string why = "design not estimable (rank " + std::to_string(report.rank_found) +
                          "/" + std::to_string(report.rank_required) + ")";
        for (const auto& a : report.assumption_results)
            if (!a.pass) why += "; " + a.id + ": " + a.detail;
        throw NotEstimable(why);
    }

    FullDesignMatrix full = assemble_design_matrix(design, spec.basis);
    GeeProblem pb;
    pb.spec = spec;
    pb.n_units = design.n_units_total();
    pb.P = design.n_periods();
    pb.L = design.n_obs_per_period();
    pb.d = basis_dim(spec.basis);
    pb.pairs = full.pairs;
    pb.n_carry = include_carryover ? static_cast<int>(full.pairs.size()) : 0;
    pb.basis_offsets = full.basis_offsets;

    const auto [t_start, t_len] = full.block("time");
    pb.p_beta = t_start;  // intercept + treatment + period are the leading columns
    const int q = pb.p_beta + pb.d * (1 + pb.n_carry);
    pb.X = full.values.leftCols(q);

    if (y.size() != pb.X.rows()) throw DataShapeMismatch("response length != design rows");
    pb.y = std::move(y);
    pb.denom = denom.size() == 0 ? Eigen::VectorXd::Ones(pb.X.rows()) : std::move(denom);
    if (pb.denom.size() != pb.X.rows()) throw DataShapeMismatch("denominator length != design rows");

    pb.penalty_time = make_penalty(pb.d, resolve_order(spec.penalty_order_time, spec.basis));
    pb.penalty_carry = make_penalty(pb.d, resolve_order(spec.penalty_order_carry, spec.basis));

    pb.column_names.push_back("intercept");
    const auto labels = design.treatments();
    for (std::size_t t = 1; t < labels.size(); ++t) pb.column_names.push_back("treatment:" + labels[t]);
    for (int j = 2; j <= pb.P; ++j) pb.column_names.push_back("period:" + std::to_string(j));
    for (int l = 0; l < pb.d; ++l) pb.column_names.push_back("time:phi" + std::to_string(l + 1));
    for (int c = 0; c < pb.n_carry; ++c)
        for (int l = 0; l < pb.d; ++l)
            pb.column_names.push_back("carryover:" + pb.pairs[c].label() + ":phi" + std::to_string(l + 1));
    return pb;
}

GeeProblem GeeProblem::parametric(Eigen::MatrixXd X, Eigen::VectorXd y,
                                  int n_units, int P, int L, ModelSpec spec) {
    return with_blocks(std::move(X), std::move(y), n_units, P, L,
                       -1, 0, 0, std::move(spec));
}

GeeProblem GeeProblem::with_blocks(Eigen::MatrixXd X, Eigen::VectorXd y,
                                   int n_units, int P, int L, int p_beta, int d,
                                   int n_carry, ModelSpec spec) {
    GeeProblem pb;
    pb.X = std::move(X);
    pb.y = std::move(y);
    pb.n_units = n_units;
    pb.P = P;
    pb.L = L;
    pb.spec = std::move(spec);
    pb.p_beta = p_beta < 0 ? static_cast<int>(pb.X.cols()) : p_beta;
    pb.d = d;
    pb.n_carry = n_carry;
    if (pb.X.rows() != static_cast<Eigen::Index>(n_units) * P * L)
        throw DataShapeMismatch("X rows != n_units * P * L");
    if (pb.y.size() != pb.X.rows()) throw DataShapeMismatch("y length != X rows");
    if (pb.n_params() != pb.X.cols())
        throw DataShapeMismatch("block layout does not cover all columns");
    pb.denom = Eigen::VectorXd::Ones(pb.X.rows());
    if (d > 0) {
        pb.penalty_time = make_penalty(d, resolve_order(pb.spec.penalty_order_time, pb.spec.basis));
        pb.penalty_carry = make_penalty(d, resolve_order(pb.spec.penalty_order_carry, pb.spec.basis));
        pb.basis_offsets = Eigen::RowVectorXd::Zero(d);
    }
    return pb;
}

Eigen::VectorXd FitResult::full_params() const {
    Eigen::Index q = beta.size() + theta.size();
    for (const auto& tc : theta_c) q += tc.size();
    Eigen::VectorXd out(q);
    Eigen::Index at = 0;
    out.segment(at, beta.size()) = beta;
    at += beta.size();
    out.segment(at, theta.size()) = theta;
    at += theta.size();
    for (const auto& tc : theta_c) {
        out.segment(at, tc.size()) = tc;
        at += tc.size();
    }
    return out;
}

Eigen::VectorXd block_update(const GeeProblem& pb, BlockRef block,
                             const Eigen::VectorXd& params,
                             const AlphaEstimate& alpha) {
    const Eigen::MatrixXd r_inv = r_inverse(pb, alpha);
    const int start = pb.block_start(block);
    const int nb = pb.block_size(block);

    Eigen::MatrixXd G;
    Eigen::VectorXd g;
    accumulate_block(pb, block, params, r_inv, G, g);
    const Eigen::MatrixXd lam_pen = pb.block_penalty(block);
    G += lam_pen;
    g.noalias() -= lam_pen * params.segment(start, nb);

    Eigen::VectorXd delta = solve_spd(G, g);

    // Step halving when the Pearson chi-square jumps by more than 10%.
    const double chi2_old = pearson_chi2(pb, params);
    Eigen::VectorXd candidate = params;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        candidate.segment(start, nb) = params.segment(start, nb) + delta;
        if (pearson_chi2(pb, candidate) <= 1.1 * chi2_old || attempt == 5) break;
        delta *= 0.5;
    }
    return candidate.segment(start, nb);
}

Eigen::MatrixXd block_information(const GeeProblem& pb, const Eigen::VectorXd& params,
                                  const AlphaEstimate& alpha, BlockRef block) {
    const Eigen::MatrixXd r_inv = r_inverse(pb, alpha);
    Eigen::MatrixXd G;
    Eigen::VectorXd g;
    accumulate_block(pb, block, params, r_inv, G, g);
    return G;
}

Eigen::MatrixXd sandwich_cov(const GeeProblem& pb, const Eigen::VectorXd& params,
                             const AlphaEstimate& alpha, BlockRef block) {
    const Eigen::MatrixXd cov = joint_sandwich(pb, params, alpha);
    const int s = pb.block_start(block);
    const int nb = pb.block_size(block);
    return cov.block(s, s, nb, nb);
}

FitResult fit(const GeeProblem& pb) {
    if (pb.y.size() != pb.X.rows() || pb.X.rows() != static_cast<Eigen::Index>(pb.n_units) * pb.cluster_size())
        throw DataShapeMismatch("problem shape mismatch");
    const int q = pb.n_params();

    Eigen::VectorXd params = Eigen::VectorXd::Zero(q);
    // Family-appropriate intercept-only start when the leading column is constant.
    if (pb.p_beta > 0 && (pb.X.col(0).array() == 1.0).all())
        params[0] = pb.spec.family.link(pb.y.mean());

    AlphaEstimate alpha = AlphaEstimate::zero(pb.spec.correlation);
    FitResult res;
    res.alpha = alpha;
    res.dispersion = 1.0;

    std::vector<BlockRef> penalized_blocks;
    if (pb.d > 0) {
        penalized_blocks.push_back(BlockRef::time());
        for (int c = 0; c < pb.n_carry; ++c) penalized_blocks.push_back(BlockRef::carry(c));
    }

    double p_eff = pb.p_beta;
    for (int iter = 1; iter <= pb.spec.max_iter; ++iter) {
        const Eigen::VectorXd old = params;

        for (const BlockRef& b : penalized_blocks)
            params.segment(pb.block_start(b), pb.block_size(b)) = block_update(pb, b, params, alpha);
        if (pb.p_beta > 0)
            params.segment(0, pb.p_beta) = block_update(pb, BlockRef::beta(), params, alpha);

        // Effective dof: unpenalized count plus trace of each block smoother.
        p_eff = pb.p_beta;
        for (const BlockRef& b : penalized_blocks) {
            const Eigen::MatrixXd info = block_information(pb, params, alpha, b);
            const Eigen::MatrixXd lam_pen = pb.block_penalty(b);
            p_eff += (info + lam_pen).ldlt().solve(info).trace();
        }

        const LinkState st = link_state(pb, params);
        const ResidualBundle rb =
            pearson_weighted(pb.spec.family, pb.y, st.mu, pb.denom,
                             std::min(p_eff, static_cast<double>(pb.n_obs()) - 1.0));
        res.dispersion = std::max(rb.dispersion, 1e-12);

        if (pb.spec.correlation.n_params() > 0) {
            Eigen::MatrixXd resid_by_unit(pb.n_units, pb.cluster_size());
            for (int i = 0; i < pb.n_units; ++i)
                resid_by_unit.row(i) = rb.pearson.segment(i * pb.cluster_size(), pb.cluster_size());
            alpha = update_alpha(resid_by_unit, res.dispersion, pb.spec.correlation, pb.P, pb.L);
        }

        double delta = 0.0;
        for (int j = 0; j < q; ++j)
            delta = std::max(delta, std::abs(params[j] - old[j]) / (std::abs(old[j]) + 1e-4));
        res.trace.push_back(delta);
        res.iterations = iter;
        if (delta <= pb.spec.tol) {
            res.converged = true;
            break;
        }
    }

    res.alpha = alpha;
    res.p_effective = p_eff;
    res.beta = params.segment(0, pb.p_beta);
    if (pb.d > 0) {
        res.theta = params.segment(pb.block_start(BlockRef::time()), pb.d);
        for (int c = 0; c < pb.n_carry; ++c)
            res.theta_c.push_back(params.segment(pb.block_start(BlockRef::carry(c)), pb.d));
    } else {
        res.theta = Eigen::VectorXd();
    }
    res.fitted_mu = link_state(pb, params).mu;

    const Eigen::MatrixXd cov = joint_sandwich(pb, params, alpha);
    res.vcov_beta = cov.topLeftCorner(pb.p_beta, pb.p_beta);
    if (pb.d > 0) {
        const int ts = pb.block_start(BlockRef::time());
        res.vcov_theta = cov.block(ts, ts, pb.d, pb.d);
        for (int c = 0; c < pb.n_carry; ++c) {
            const int cs = pb.block_start(BlockRef::carry(c));
            res.vcov_theta_c.push_back(cov.block(cs, cs, pb.d, pb.d));
        }
    }
    return res;
}

} // namespace pgee
