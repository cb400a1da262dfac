#include "rankdemand/optimal.hpp"

#include "rankdemand/errors.hpp"

#include <cmath>

namespace rankdemand {

void ProfitModel::validate() const {
    const auto n = static_cast<Eigen::Index>(members.size());
    if (prices.size() != n || costs.size() != n || quantities.size() != n || N.rows() != n || N.cols() != n)
        throw InputError("profit model: dimension mismatch");
    if (!(k > 0.0)) throw InputError("profit model: k must be positive");
    if (!(prices.array() > 0.0).all()) throw InputError("profit model: prices must be positive");
    if (!(quantities.array() >= 0.0).all()) throw InputError("profit model: quantities must be non-negative");
}

double profit(const ProfitModel& model) {
    model.validate();
    return model.k * ((model.prices - model.costs).array() * model.quantities.array()).sum();
}

Eigen::VectorXd profit_gradient(const ProfitModel& model) {
    model.validate();
    const Eigen::VectorXd margin_q = (model.prices - model.costs).cwiseProduct(model.quantities);
    // sum_a (p_a - c_a) Q_a N(a, i), divided by p_i
    const Eigen::VectorXd cross = model.N.transpose() * margin_q;
    return model.k * (model.quantities + cross.cwiseQuotient(model.prices));
}

Eigen::VectorXd normalized_gradient(const ProfitModel& model, const Eigen::VectorXd& gradient) {
    model.validate();
    const double revenue = model.prices.dot(model.quantities);
    if (!(revenue > 0.0)) throw InputError("normalized gradient: total revenue is zero");
    return gradient.cwiseProduct(model.prices) / (model.k * revenue);
}

std::string_view to_string(PriceVerdict v) {
    switch (v) {
    case PriceVerdict::optimal: return "optimal";
    case PriceVerdict::overpriced: return "overpriced";
    case PriceVerdict::underpriced: return "underpriced";
    }
    return "unknown";
}

PriceVerdict classify_value(double g, double tolerance) {
    if (!(tolerance > 0.0)) throw InputError("classify: tolerance must be positive");
    if (g < -tolerance) return PriceVerdict::overpriced;
    if (g > tolerance) return PriceVerdict::underpriced;
    return PriceVerdict::optimal;
}

std::vector<OptimalityVerdict> classify(const ProfitModel& model, const Eigen::VectorXd& gradient, double tolerance) {
    if (gradient.size() != static_cast<Eigen::Index>(model.members.size()))
        throw InputError("classify: gradient length mismatch");
    const Eigen::VectorXd g = normalized_gradient(model, gradient);
    std::vector<OptimalityVerdict> out;
    for (std::size_t i = 0; i < model.members.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out.push_back({model.members[i], gradient(k), g(k), classify_value(g(k), tolerance), tolerance});
    }
    return out;
}

} // namespace rankdemand
