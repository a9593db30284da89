#include "pgee/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "pgee/linalg.hpp"

namespace pgee {

namespace {

constexpr double kClipMargin = 1e-6;

Eigen::MatrixXd structure_matrix(CorrKind kind, double alpha, int dim) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(dim, dim);
    switch (kind) {
        case CorrKind::independence: break;
        case CorrKind::exchangeable:
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    if (i != j) r(i, j) = alpha;
            break;
        case CorrKind::ar1:
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    if (i != j) r(i, j) = std::pow(alpha, std::abs(i - j));
            break;
    }
    return r;
}

void check_pd(const Eigen::MatrixXd& r, const std::string& what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 1e-10)
        throw NotPositiveDefinite(what + " correlation matrix is not positive definite");
}

double clip(double x, double lo, double hi) {
    return std::clamp(x, lo + kClipMargin, hi - kClipMargin);
}

/// Admissible lower bound for an exchangeable correlation of the given size.
double exch_lower(int dim) { return dim > 1 ? -1.0 / (dim - 1) : 0.0; }

struct ProductStats {
    KahanSum sum;
    long count = 0;
};

} // namespace

int CorrelationSpec::n_params() const {
    if (kronecker) {
        return (between == CorrKind::independence ? 0 : 1) +
               (within == CorrKind::independence ? 0 : 1);
    }
    return structure == CorrKind::independence ? 0 : 1;
}

std::string CorrelationSpec::name() const {
    auto nm = [](CorrKind k) {
        switch (k) {
            case CorrKind::independence: return "independence";
            case CorrKind::exchangeable: return "exchangeable";
            case CorrKind::ar1: return "ar1";
        }
        return "?";
    };
    if (kronecker) return std::string("kronecker(") + nm(between) + "," + nm(within) + ")";
    return nm(structure);
}

CorrelationSpec CorrelationSpec::parse(const std::string& text) {
    auto parse_kind = [](const std::string& s) {
        if (s == "independence") return CorrKind::independence;
        if (s == "exchangeable") return CorrKind::exchangeable;
        if (s == "ar1") return CorrKind::ar1;
        throw ConfigError("unknown correlation structure: " + s);
    };
    CorrelationSpec spec;
    if (text.rfind("kronecker(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(10, text.size() - 11);
        const auto comma = inner.find(',');
        if (comma == std::string::npos)
            throw ConfigError("kronecker correlation needs two components: " + text);
        spec.kronecker = true;
        spec.between = parse_kind(inner.substr(0, comma));
        spec.within = parse_kind(inner.substr(comma + 1));
        return spec;
    }
    spec.structure = parse_kind(text);
    return spec;
}

AlphaEstimate AlphaEstimate::zero(const CorrelationSpec& spec) {
    AlphaEstimate a;
    a.alpha = Eigen::VectorXd::Zero(spec.n_params());
    return a;
}

Eigen::MatrixXd build_R(const CorrelationSpec& spec, const AlphaEstimate& alpha,
                        int P, int L) {
    const int dim = P * L;
    if (alpha.alpha.size() != spec.n_params())
        throw DataShapeMismatch("alpha length does not match correlation structure");

    if (!spec.kronecker) {
        const double a = spec.structure == CorrKind::independence ? 0.0 : alpha.alpha[0];
        Eigen::MatrixXd r = structure_matrix(spec.structure, a, dim);
        if (spec.structure != CorrKind::independence) check_pd(r, spec.name());
        return r;
    }

    int idx = 0;
    const double ab = spec.between == CorrKind::independence ? 0.0 : alpha.alpha[idx++];
    const double aw = spec.within == CorrKind::independence ? 0.0 : alpha.alpha[idx++];
    Eigen::MatrixXd rb = structure_matrix(spec.between, ab, P);
    Eigen::MatrixXd rw = structure_matrix(spec.within, aw, L);
    // Eigenvalues of the Kronecker product are products of the factors'.
    if (spec.between != CorrKind::independence) check_pd(rb, "between-period");
    if (spec.within != CorrKind::independence) check_pd(rw, "within-period");
    return kron(rb, rw);
}

AlphaEstimate update_alpha(const Eigen::MatrixXd& residuals, double dispersion,
                           const CorrelationSpec& spec, int P, int L) {
    const int dim = P * L;
    if (residuals.cols() != dim)
        throw DataShapeMismatch("residual matrix must have P*L columns");
    if (dispersion <= 0.0) throw DegenerateVariance("dispersion must be positive");
    const int n_units = static_cast<int>(residuals.rows());

    AlphaEstimate est;
    est.alpha = Eigen::VectorXd::Zero(spec.n_params());

    auto finish = [&](const ProductStats& st) {
        if (st.count < 3)
            throw InsufficientData("fewer than 3 residual products available for correlation estimate");
        return st.sum.value() / (static_cast<double>(st.count) * dispersion);
    };

    if (!spec.kronecker) {
        if (spec.structure == CorrKind::independence) return est;
        ProductStats st;
        for (int i = 0; i < n_units; ++i) {
            if (spec.structure == CorrKind::exchangeable) {
                for (int a = 0; a < dim; ++a)
                    for (int b = a + 1; b < dim; ++b) {
                        st.sum.add(residuals(i, a) * residuals(i, b));
                        ++st.count;
                    }
            } else {  // ar1: lag-1 products in flattened order
                for (int a = 0; a + 1 < dim; ++a) {
                    st.sum.add(residuals(i, a) * residuals(i, a + 1));
                    ++st.count;
                }
            }
        }
        const double raw = finish(st);
        est.alpha[0] = spec.structure == CorrKind::exchangeable
                           ? clip(raw, exch_lower(dim), 1.0)
                           : clip(raw, -1.0, 1.0);
        return est;
    }

    int idx = 0;
    if (spec.between != CorrKind::independence) {
        if (P < 2) throw InsufficientData("between-period correlation needs at least 2 periods");
        // Same-time cross-period products r_{ijk} r_{ij'k}.
        ProductStats st;
        for (int i = 0; i < n_units; ++i)
            for (int k = 0; k < L; ++k)
                for (int j = 0; j < P; ++j)
                    for (int j2 = j + 1; j2 < P; ++j2) {
                        if (spec.between == CorrKind::ar1 && j2 != j + 1) continue;
                        st.sum.add(residuals(i, j * L + k) * residuals(i, j2 * L + k));
                        ++st.count;
                    }
        const double raw = finish(st);
        est.alpha[idx++] = spec.between == CorrKind::exchangeable
                               ? clip(raw, exch_lower(P), 1.0)
                               : clip(raw, -1.0, 1.0);
    }
    if (spec.within != CorrKind::independence) {
        // Within-period lag products.
        ProductStats st;
        for (int i = 0; i < n_units; ++i)
            for (int j = 0; j < P; ++j) {
                if (spec.within == CorrKind::exchangeable) {
                    for (int a = 0; a < L; ++a)
                        for (int b = a + 1; b < L; ++b) {
                            st.sum.add(residuals(i, j * L + a) * residuals(i, j * L + b));
                            ++st.count;
                        }
                } else {
                    for (int a = 0; a + 1 < L; ++a) {
                        st.sum.add(residuals(i, j * L + a) * residuals(i, j * L + a + 1));
                        ++st.count;
                    }
                }
            }
        const double raw = finish(st);
        est.alpha[idx++] = spec.within == CorrKind::exchangeable
                               ? clip(raw, exch_lower(L), 1.0)
                               : clip(raw, -1.0, 1.0);
    }
    return est;
}

} // namespace pgee
