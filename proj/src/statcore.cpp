#include "rankdemand/statcore.hpp"

#include "rankdemand/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rankdemand::stat {

DesignMatrix::DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.cols() < 1) throw InputError("design matrix needs at least one column");
    if (values_.rows() < values_.cols()) throw InputError("design matrix has fewer rows than columns");
    if (static_cast<Eigen::Index>(labels_.size()) != values_.cols())
        throw InputError("design matrix label count does not match column count");
    if (!values_.allFinite()) throw InputError("design matrix contains non-finite entries");
}

bool RegressionResult::has(std::string_view label) const { return index_of(label) >= 0; }

Eigen::Index RegressionResult::index_of(std::string_view label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    return it == labels.end() ? -1 : static_cast<Eigen::Index>(it - labels.begin());
}

double RegressionResult::coefficient(std::string_view label) const {
    auto i = index_of(label);
    if (i < 0) throw InputError("no retained coefficient '" + std::string(label) + "'");
    return coefficients(i);
}

double RegressionResult::std_error(std::string_view label) const {
    auto i = index_of(label);
    if (i < 0) throw InputError("no retained coefficient '" + std::string(label) + "'");
    return std::sqrt(std::max(0.0, covariance(i, i)));
}

namespace {

// Greedy left-to-right selection of linearly independent columns (Gram-Schmidt with reorthogonalization).
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& X, double tolerance) {
    std::vector<Eigen::Index> kept;
    Eigen::MatrixXd basis(X.rows(), 0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Eigen::VectorXd v = X.col(j);
        const double norm = v.norm();
        if (norm == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index b = 0; b < basis.cols(); ++b) v -= basis.col(b).dot(v) * basis.col(b);
        const double rest = v.norm();
        if (rest <= tolerance * norm) continue;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = v / rest;
        kept.push_back(j);
    }
    return kept;
}

bool is_constant_nonzero(const Eigen::VectorXd& c) {
    return c.size() > 0 && c(0) != 0.0 && (c.array() == c(0)).all();
}

Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) throw NumericalError("X'X is singular");
    return lu.inverse();
}

} // namespace

Eigen::MatrixXd white_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals, CovarianceKind kind,
                                 Eigen::Index absorbed_dof) {
    if (X.rows() != residuals.size()) throw InputError("white_covariance: dimension mismatch");
    const Eigen::MatrixXd bread = xtx_inverse(X);
    const Eigen::MatrixXd meat = X.transpose() * residuals.array().square().matrix().asDiagonal() * X;
    Eigen::MatrixXd cov = bread * meat * bread;
    cov = 0.5 * (cov + cov.transpose()).eval();
    if (kind == CovarianceKind::hc1) {
        const auto n = X.rows();
        const auto dof = n - X.cols() - absorbed_dof;
        if (dof <= 0) throw NumericalError("HC1 scaling needs positive residual degrees of freedom");
        cov *= static_cast<double>(n) / static_cast<double>(dof);
    }
    return cov;
}

Eigen::MatrixXd classical_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                     Eigen::Index absorbed_dof) {
    if (X.rows() != residuals.size()) throw InputError("classical_covariance: dimension mismatch");
    const auto dof = X.rows() - X.cols() - absorbed_dof;
    if (dof <= 0) throw NumericalError("classical covariance needs positive residual degrees of freedom");
    Eigen::MatrixXd cov = residuals.squaredNorm() / static_cast<double>(dof) * xtx_inverse(X);
    return 0.5 * (cov + cov.transpose());
}

RegressionResult ols_fit(const DesignMatrix& design, const Eigen::VectorXd& y, const OlsOptions& options) {
    const Eigen::MatrixXd& X = design.values();
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw InputError("ols_fit: response length does not match design rows");
    if (n <= X.cols()) throw InputError("ols_fit: need more observations than columns");
    if (!y.allFinite()) throw InputError("ols_fit: response contains non-finite values");

    RegressionResult result;
    const auto kept = independent_columns(X, options.rank_tolerance);
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (std::find(kept.begin(), kept.end(), j) == kept.end()) result.dropped_columns.push_back(design.labels()[j]);
    if (kept.empty()) throw NumericalError("ols_fit: every column is zero");

    Eigen::MatrixXd Xr(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        Xr.col(static_cast<Eigen::Index>(c)) = X.col(kept[c]);
        result.labels.push_back(design.labels()[kept[c]]);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xr);
    result.coefficients = qr.solve(y);
    result.residuals = y - Xr * result.coefficients;
    result.n = n;
    result.k = Xr.cols();
    result.covariance = white_covariance(Xr, result.residuals, options.covariance, options.absorbed_dof);

    bool intercept = false;
    for (Eigen::Index c = 0; c < Xr.cols(); ++c) intercept = intercept || is_constant_nonzero(Xr.col(c));
    result.centered_r_squared = intercept;
    const double total = intercept ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
    if (total > 0.0) {
        result.r_squared = std::clamp(1.0 - result.residuals.squaredNorm() / total, 0.0, 1.0);
    } else {
        result.r_squared = 0.0;
        result.r_squared_defined = false;
    }
    return result;
}

Eigen::VectorXd within_transform(std::span<const double> values, std::span<const std::string> entity_ids) {
    if (values.size() != entity_ids.size()) throw InputError("within_transform: length mismatch");
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];

    std::map<std::string_view, std::size_t> counts;
    for (const auto& id : entity_ids) ++counts[id];

    // Two demeaning passes; the second removes rounding left by the first.
    for (int pass = 0; pass < 2; ++pass) {
        std::map<std::string_view, double> sums;
        for (std::size_t i = 0; i < values.size(); ++i) sums[entity_ids[i]] += out(static_cast<Eigen::Index>(i));
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto& id = entity_ids[i];
            out(static_cast<Eigen::Index>(i)) -= sums[id] / static_cast<double>(counts[id]);
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i)
        if (counts[entity_ids[i]] == 1) out(static_cast<Eigen::Index>(i)) = 0.0;
    return out;
}

LinearSolution solve_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double max_condition) {
    if (A.rows() != A.cols()) throw InputError("solve_linear: matrix is not square");
    if (A.rows() != b.size()) throw InputError("solve_linear: right-hand side length mismatch");
    if (A.rows() == 0) throw InputError("solve_linear: empty system");
    if (!A.allFinite() || !b.allFinite()) throw InputError("solve_linear: non-finite input");

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw IllConditionedError("solve_linear: matrix is singular", std::numeric_limits<double>::infinity());
    const Eigen::MatrixXd inv = lu.inverse();
    const double condition = A.cwiseAbs().colwise().sum().maxCoeff() * inv.cwiseAbs().colwise().sum().maxCoeff();
    if (!(condition <= max_condition))
        throw IllConditionedError("solve_linear: condition estimate " + std::to_string(condition) + " exceeds " +
                                      std::to_string(max_condition),
                                  condition);
    LinearSolution sol;
    sol.x = lu.solve(b);
    // One refinement step.
    sol.x += lu.solve(b - A * sol.x);
    sol.condition = condition;
    return sol;
}

double normal_p_value(double estimate, double std_error) {
    // Sign of a reported standard error carries no information.
    const double se = std::abs(std_error);
    if (!(se > 0.0)) return estimate == 0.0 ? 1.0 : 0.0;
    return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

std::string significance_stars(double estimate, double std_error) {
    const double p = normal_p_value(estimate, std_error);
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

} // namespace rankdemand::stat
