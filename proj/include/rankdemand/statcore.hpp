#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankdemand::stat {

/// Regressor matrix with one label per column. Construction enforces n >= k >= 1 and finite entries.
class DesignMatrix {
public:
    DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> labels);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> labels_;
};

enum class CovarianceKind { hc0, hc1 };

struct OlsOptions {
    CovarianceKind covariance = CovarianceKind::hc0;
    /// Entity means absorbed by a prior within transformation; only affects HC1 scaling.
    Eigen::Index absorbed_dof = 0;
    /// Column dropped when its component orthogonal to earlier retained columns is below this fraction of its norm.
    double rank_tolerance = 1e-9;
};

struct RegressionResult {
    std::vector<std::string> labels;  // retained columns, in design order
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd covariance;
    double r_squared = 0.0;
    bool r_squared_defined = true;
    bool centered_r_squared = false;
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    std::vector<std::string> dropped_columns;

    bool has(std::string_view label) const;
    double coefficient(std::string_view label) const;
    double std_error(std::string_view label) const;
    /// Position of `label` among retained columns, or -1.
    Eigen::Index index_of(std::string_view label) const;
};

/// Least squares with deterministic leftmost-retained rank handling and White covariance.
RegressionResult ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y, const OlsOptions& options = {});

/// (X'X)^-1 X' diag(e^2) X (X'X)^-1, symmetrized. HC1 rescales by n / (n - k - absorbed_dof).
Eigen::MatrixXd white_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                 CovarianceKind kind = CovarianceKind::hc0, Eigen::Index absorbed_dof = 0);

/// s^2 (X'X)^-1 with s^2 = e'e / (n - k - absorbed_dof).
Eigen::MatrixXd classical_covariance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                     Eigen::Index absorbed_dof = 0);

/// Demeans each value by the mean of its entity. Singleton entities map to 0.
Eigen::VectorXd within_transform(std::span<const double> values, std::span<const std::string> entity_ids);

struct LinearSolution {
    Eigen::VectorXd x;
    double condition = 1.0;  // 1-norm condition number of A
};

inline constexpr double kMaxCondition = 1e8;

/// Solves Ax = b; throws IllConditionedError when cond_1(A) exceeds `max_condition`.
LinearSolution solve_linear(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            double max_condition = kMaxCondition);

/// Two-sided p-value under the normal approximation.
double normal_p_value(double estimate, double std_error);
/// "***", "**", "*" or "" at the 0.01 / 0.05 / 0.10 levels.
std::string significance_stars(double estimate, double std_error);

} // namespace rankdemand::stat
