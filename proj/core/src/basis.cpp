#include "pgee/basis.hpp"

#include <cmath>

namespace pgee {

BasisSpec BasisSpec::bspline(int k, int m, double t_domain, bool centered) {
    BasisSpec s;
    s.kind = BasisKind::BSpline;
    s.order = k;
    s.internal_knots = m;
    s.t_domain = t_domain;
    s.centered = centered;
    return s;
}

BasisSpec BasisSpec::fourier(int harmonics, double t_domain, bool centered) {
    BasisSpec s;
    s.kind = BasisKind::Fourier;
    s.harmonics = harmonics;
    s.t_domain = t_domain;
    s.centered = centered;
    return s;
}

int basis_dim(const BasisSpec& spec) {
    if (spec.kind == BasisKind::BSpline) {
        if (spec.order < 2) throw Error("B-spline order must be >= 2");
        if (spec.internal_knots < 0) throw Error("internal_knots must be >= 0");
        return spec.internal_knots + spec.order - 1;
    }
    if (spec.harmonics < 1) throw Error("Fourier harmonics must be >= 1");
    return 2 * spec.harmonics;
}

namespace {

std::vector<double> clamped_knots(int order, int m, double t_domain) {
    std::vector<double> knots;
    knots.reserve(2 * order + m);
    for (int i = 0; i < order; ++i) knots.push_back(0.0);
    for (int i = 1; i <= m; ++i) knots.push_back(t_domain * i / (m + 1.0));
    for (int i = 0; i < order; ++i) knots.push_back(t_domain);
    return knots;
}

} // namespace

Eigen::MatrixXd bspline_full_basis(int order, int internal_knots, double t_domain,
                                   const std::vector<double>& times) {
    const int nbasis = internal_knots + order;
    const auto knots = clamped_knots(order, internal_knots, t_domain);
    const int n_knots = static_cast<int>(knots.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<int>(times.size()), nbasis);

    for (std::size_t r = 0; r < times.size(); ++r) {
        const double x = times[r];
        // Knot span containing x; right endpoint folds into the last span.
        int span = order - 1;
        while (span < n_knots - order - 1 && x >= knots[span + 1]) ++span;

        // Cox-de Boor: the order nonzero functions on this span.
        std::vector<double> vals(order, 0.0);
        vals[0] = 1.0;
        std::vector<double> left(order), right(order);
        for (int j = 1; j < order; ++j) {
            left[j] = x - knots[span + 1 - j];
            right[j] = knots[span + j] - x;
            double saved = 0.0;
            for (int i = 0; i < j; ++i) {
                const double denom = right[i + 1] + left[j - i];
                const double tmp = denom != 0.0 ? vals[i] / denom : 0.0;
                vals[i] = saved + right[i + 1] * tmp;
                saved = left[j - i] * tmp;
            }
            vals[j] = saved;
        }
        for (int i = 0; i < order; ++i) out(static_cast<int>(r), span - order + 1 + i) = vals[i];
    }
    return out;
}

Eigen::MatrixXd evaluate_raw(const BasisSpec& spec, const std::vector<double>& times) {
    if (times.empty()) throw Error("basis evaluation needs at least one time");
    for (double t : times)
        if (t < 0.0 || t > spec.t_domain)
            throw TimeOutOfDomain("time " + std::to_string(t) + " outside [0, " +
                                  std::to_string(spec.t_domain) + "]");

    if (spec.kind == BasisKind::BSpline) {
        Eigen::MatrixXd full = bspline_full_basis(spec.order, spec.internal_knots,
                                                  spec.t_domain, times);
        return full.rightCols(full.cols() - 1);  // drop the intercept column
    }

    const int K = spec.harmonics;
    Eigen::MatrixXd out(static_cast<int>(times.size()), 2 * K);
    for (std::size_t r = 0; r < times.size(); ++r) {
        for (int h = 0; h < K; ++h) {
            const double w = 2.0 * M_PI * (h + 1) * times[r] / spec.t_domain;
            out(static_cast<int>(r), 2 * h) = std::sin(w);
            out(static_cast<int>(r), 2 * h + 1) = std::cos(w);
        }
    }
    return out;
}

BasisMatrix evaluate(const BasisSpec& spec, const std::vector<double>& times) {
    BasisMatrix bm;
    bm.spec = spec;
    bm.times = times;
    bm.values = evaluate_raw(spec, times);
    bm.offsets = Eigen::RowVectorXd::Zero(bm.values.cols());
    if (spec.centered) {
        bm.offsets = bm.values.colwise().mean();
        bm.values.rowwise() -= bm.offsets;
    }
    return bm;
}

Eigen::MatrixXd evaluate_at(const BasisSpec& spec, const std::vector<double>& grid,
                            const Eigen::RowVectorXd& offsets) {
    Eigen::MatrixXd vals = evaluate_raw(spec, grid);
    if (offsets.size() != vals.cols()) throw DataShapeMismatch("offset length != basis dim");
    vals.rowwise() -= offsets;
    return vals;
}

PenaltyMatrix penalty_matrix(const BasisSpec& spec, int order) {
    const int d = basis_dim(spec);
    if (order != 0 && order != 2) throw Error("penalty order must be 0 or 2");
    PenaltyMatrix p;
    p.order = order;
    if (order == 0) {
        p.values = Eigen::MatrixXd::Identity(d, d);
        return p;
    }
    if (d < 3) throw PenaltyOrderTooHigh("second-difference penalty needs basis dim >= 3");
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(d - 2, d);
    for (int i = 0; i < d - 2; ++i) {
        d2(i, i) = 1.0;
        d2(i, i + 1) = -2.0;
        d2(i, i + 2) = 1.0;
    }
    p.values = d2.transpose() * d2;
    return p;
}

int default_penalty_order(const BasisSpec& spec) {
    return spec.kind == BasisKind::BSpline ? 2 : 0;
}

} // namespace pgee
