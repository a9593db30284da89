#ifndef PGEE_BASIS_HPP
#define PGEE_BASIS_HPP

#include <vector>

#include <Eigen/Dense>

#include "pgee/errors.hpp"

namespace pgee {

enum class BasisKind { BSpline, Fourier };

/// Functional basis over [0, t_domain].
///
/// BSpline: order k (degree k-1) with m equally spaced internal knots and
/// full boundary multiplicity; the intercept column is dropped so the
/// dimension is m + k - 1. Fourier: K sine/cosine harmonics at multiples of
/// the fundamental frequency, no constant term, dimension 2K.
struct BasisSpec {
    BasisKind kind = BasisKind::BSpline;
    int order = 4;           // k, B-spline only
    int internal_knots = 0;  // m, B-spline only
    int harmonics = 1;       // K, Fourier only
    double t_domain = 1.0;
    bool centered = true;

    static BasisSpec bspline(int k, int m, double t_domain, bool centered = true);
    static BasisSpec fourier(int harmonics, double t_domain, bool centered = true);
};

int basis_dim(const BasisSpec& spec);

struct BasisMatrix {
    Eigen::MatrixXd values;  // L x d
    BasisSpec spec;
    std::vector<double> times;
    Eigen::RowVectorXd offsets;  // column means removed when centered, else zero
};

/// Evaluate the basis at `times`; columns are mean-centered over those times
/// when spec.centered is set.
BasisMatrix evaluate(const BasisSpec& spec, const std::vector<double>& times);

/// Evaluate on an arbitrary grid reusing centering offsets from a fit, so
/// predicted curves line up with the fitted coefficients.
Eigen::MatrixXd evaluate_at(const BasisSpec& spec, const std::vector<double>& grid,
                            const Eigen::RowVectorXd& offsets);

/// Raw uncentered basis, intercept column still removed.
Eigen::MatrixXd evaluate_raw(const BasisSpec& spec, const std::vector<double>& times);

/// Full B-spline basis including the intercept column (m + k columns).
Eigen::MatrixXd bspline_full_basis(int order, int internal_knots, double t_domain,
                                   const std::vector<double>& times);

struct PenaltyMatrix {
    Eigen::MatrixXd values;  // d x d, symmetric PSD
    int order = 0;           // 0 = ridge, 2 = second difference
};

PenaltyMatrix penalty_matrix(const BasisSpec& spec, int order);

/// Default penalty order: second differences for B-splines, ridge for Fourier.
int default_penalty_order(const BasisSpec& spec);

} // namespace pgee

#endif
