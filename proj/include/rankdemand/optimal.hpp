#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankdemand {

/// Local profit model of a product group: observed prices, costs and quantities plus the elasticity matrix.
struct ProfitModel {
    std::vector<std::string> members;
    Eigen::VectorXd prices;
    Eigen::VectorXd costs;
    Eigen::VectorXd quantities;
    Eigen::MatrixXd N;  // N(a, b) = elasticity of Q_a with respect to p_b
    double k = 1.0;

    /// Throws InputError unless k > 0, prices > 0, quantities >= 0 and dimensions agree.
    void validate() const;
};

/// k * sum_i (p_i - c_i) Q_i.
double profit(const ProfitModel& model);

/// dPi/dp_i = k [Q_i + sum_a (p_a - c_a) N(a, i) Q_a / p_i].
Eigen::VectorXd profit_gradient(const ProfitModel& model);

/// Gradient scaled by p_i / (k * total revenue); free of k.
Eigen::VectorXd normalized_gradient(const ProfitModel& model, const Eigen::VectorXd& gradient);

enum class PriceVerdict { optimal, overpriced, underpriced };
std::string_view to_string(PriceVerdict v);

inline constexpr double kDefaultTolerance = 0.01;

struct OptimalityVerdict {
    std::string product_id;
    double gradient = 0.0;
    double normalized_gradient = 0.0;
    PriceVerdict classification = PriceVerdict::optimal;
    double tolerance = kDefaultTolerance;
};

PriceVerdict classify_value(double normalized_gradient, double tolerance);

/// Classifies each member from raw gradients, normalizing with the model's prices and revenues.
std::vector<OptimalityVerdict> classify(const ProfitModel& model, const Eigen::VectorXd& gradient,
                                        double tolerance = kDefaultTolerance);

} // namespace rankdemand
