#ifndef PGEE_SOLVER_HPP
#define PGEE_SOLVER_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgee/basis.hpp"
#include "pgee/correlation.hpp"
#include "pgee/design.hpp"
#include "pgee/estimability.hpp"
#include "pgee/glm.hpp"

namespace pgee {

struct ModelSpec {
    Family family;
    CorrelationSpec correlation;
    BasisSpec basis;
    double lambda_time = 0.0;
    std::vector<double> lambda_carry;  // single value broadcasts; empty = all zero
    int penalty_order_time = -1;   // -1: second difference for B-splines, ridge for Fourier
    int penalty_order_carry = -1;
    int max_iter = 200;
    double tol = 1e-6;
    bool allow_rank_deficient = false;
};

/// Parameter block addressing: beta (intercept + treatment + period), the
/// time smooth, or one carry-over smooth.
struct BlockRef {
    enum class Kind { beta, time, carry };
    Kind kind = Kind::beta;
    int index = 0;

    static BlockRef beta() { return {Kind::beta, 0}; }
    static BlockRef time() { return {Kind::time, 0}; }
    static BlockRef carry(int c) { return {Kind::carry, c}; }
};

/// A fully assembled estimation problem: stacked design matrix, response,
/// unit structure, block layout, and penalties. Immutable once built.
struct GeeProblem {
    Eigen::MatrixXd X;      // N x q, N = n_units * P * L
    Eigen::VectorXd y;
    Eigen::VectorXd denom;  // binomial denominators, ones otherwise
    int n_units = 0;
    int P = 0;
    int L = 0;
    ModelSpec spec;

    int p_beta = 0;   // unpenalized columns (leading)
    int d = 0;        // basis dimension (0 = purely parametric model)
    int n_carry = 0;
    Eigen::MatrixXd penalty_time;   // d x d
    Eigen::MatrixXd penalty_carry;  // d x d
    Eigen::RowVectorXd basis_offsets;
    std::vector<CarryoverPair> pairs;
    std::vector<std::string> column_names;

    int n_params() const { return p_beta + d * (1 + n_carry); }
    int cluster_size() const { return P * L; }
    int n_obs() const { return n_units * P * L; }

    int block_start(BlockRef b) const;
    int block_size(BlockRef b) const;
    double block_lambda(BlockRef b) const;
    /// lambda * P for the block; zero matrix for beta.
    Eigen::MatrixXd block_penalty(BlockRef b) const;

    /// Build from a certified crossover design. Throws NotEstimable when the
    /// estimability certificate fails and allow_rank_deficient is not set.
    static GeeProblem from_design(const CrossoverDesign& design, const ModelSpec& spec,
                                  Eigen::VectorXd y, Eigen::VectorXd denom = {},
                                  bool include_carryover = true);

    /// Purely parametric problem: every column belongs to the beta block.
    static GeeProblem parametric(Eigen::MatrixXd X, Eigen::VectorXd y,
                                 int n_units, int P, int L, ModelSpec spec);

    /// Explicit block layout over an arbitrary matrix (tests, randomized
    /// problems). Penalties are built from the configured penalty orders at
    /// the given basis dimension.
    static GeeProblem with_blocks(Eigen::MatrixXd X, Eigen::VectorXd y,
                                  int n_units, int P, int L, int p_beta, int d,
                                  int n_carry, ModelSpec spec);
};

struct FitResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd theta;
    std::vector<Eigen::VectorXd> theta_c;
    AlphaEstimate alpha;
    double dispersion = 1.0;
    double p_effective = 0.0;
    Eigen::MatrixXd vcov_beta;
    Eigen::MatrixXd vcov_theta;
    std::vector<Eigen::MatrixXd> vcov_theta_c;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;  // max relative parameter change per cycle
    Eigen::VectorXd fitted_mu;

    Eigen::VectorXd full_params() const;
};

/// One Fisher-scoring step for a single block at the given state; returns the
/// updated block parameters. Exposed mainly for testing the update algebra.
Eigen::VectorXd block_update(const GeeProblem& pb, BlockRef block,
                             const Eigen::VectorXd& params,
                             const AlphaEstimate& alpha);

/// Full cyclic fit: time, each carry-over, beta, then correlation/dispersion,
/// repeated until the max relative change drops below spec.tol.
FitResult fit(const GeeProblem& pb);

/// Robust sandwich covariance for a block at the supplied parameter state.
Eigen::MatrixXd sandwich_cov(const GeeProblem& pb, const Eigen::VectorXd& params,
                             const AlphaEstimate& alpha, BlockRef block);

/// Unpenalized block information sum(D^T V^-1 D) at the state, for QIC and
/// effective-dof computations.
Eigen::MatrixXd block_information(const GeeProblem& pb, const Eigen::VectorXd& params,
                                  const AlphaEstimate& alpha, BlockRef block);

/// Penalty matrix of the requested order and dimension (identity or second
/// difference Gram matrix).
Eigen::MatrixXd make_penalty(int d, int order);

} // namespace pgee

#endif
