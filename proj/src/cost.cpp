#include "rankdemand/cost.hpp"

#include "rankdemand/errors.hpp"

#include <cmath>

namespace rankdemand {

Eigen::VectorXd revenue_shares(std::span<const double> prices, std::span<const double> quantities) {
    if (prices.size() != quantities.size() || prices.empty()) throw InputError("revenue_shares: size mismatch");
    Eigen::VectorXd revenue(static_cast<Eigen::Index>(prices.size()));
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) throw InputError("revenue_shares: prices must be positive");
        if (!(quantities[i] >= 0.0)) throw InputError("revenue_shares: quantities must be non-negative");
        revenue(static_cast<Eigen::Index>(i)) = prices[i] * quantities[i];
    }
    const double total = revenue.sum();
    if (!(total > 0.0)) throw InputError("revenue_shares: all quantities are zero");
    return revenue / total;
}

Eigen::VectorXd shares_from_ranks(std::span<const double> prices, std::span<const double> ranks, double beta,
                                  RankShareForm form) {
    if (!(beta < 0.0)) throw InputError("shares_from_ranks: beta must be negative");
    if (prices.size() != ranks.size() || prices.empty()) throw InputError("shares_from_ranks: size mismatch");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0)) throw InputError("shares_from_ranks: prices must be positive");
        if (!(ranks[i] >= 1.0)) throw InputError("shares_from_ranks: ranks must be >= 1");
    }
    const auto n = static_cast<Eigen::Index>(prices.size());
    Eigen::VectorXd s(n);
    if (form == RankShareForm::literal) {
        if (n != 2) throw InputError("literal rank-share form is defined for two products only");
        for (Eigen::Index i = 0; i < 2; ++i) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(1 - i);
            s(i) = 1.0 / (1.0 + prices[a] / prices[b] * std::pow(ranks[b] / ranks[a], beta));
        }
        return s;
    }
    // Scale by the smallest rank so the largest weight is O(price).
    double rmin = ranks[0];
    for (double r : ranks) rmin = std::min(rmin, r);
    for (Eigen::Index i = 0; i < n; ++i)
        s(i) = prices[static_cast<std::size_t>(i)] * std::pow(ranks[static_cast<std::size_t>(i)] / rmin, beta);
    return s / s.sum();
}

MarkupSolution solve_markups(const Eigen::VectorXd& shares, const Eigen::MatrixXd& N, double max_condition) {
    if (N.rows() != N.cols() || N.rows() != shares.size()) throw InputError("solve_markups: dimension mismatch");
    const Eigen::MatrixXd Nt = N.transpose();
    auto sol = stat::solve_linear(Nt, -shares, max_condition);
    MarkupSolution out;
    out.m = sol.x;
    out.condition = sol.condition;
    out.residual = (shares + Nt * out.m).cwiseAbs().maxCoeff();
    if (!(out.residual <= 1e-9 * shares.cwiseAbs().maxCoeff()))
        throw NumericalError("solve_markups: reconstruction residual " + std::to_string(out.residual) + " too large");
    return out;
}

CostEstimate marginal_costs(std::span<const std::string> members, const Eigen::VectorXd& m, const Eigen::VectorXd& shares,
                            std::span<const double> prices) {
    const auto n = static_cast<std::size_t>(m.size());
    if (members.size() != n || prices.size() != n || static_cast<std::size_t>(shares.size()) != n)
        throw InputError("marginal_costs: dimension mismatch");
    CostEstimate est;
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (!(shares(k) > 0.0)) throw InputError("marginal_costs: zero revenue share for " + members[i]);
        MemberCost c;
        c.product_id = members[i];
        c.price = prices[i];
        c.share = shares(k);
        c.m = m(k);
        c.lerner = c.m / c.share;
        c.marginal_cost = c.price * (1.0 - c.lerner);
        c.negative_cost = c.lerner > 1.0;
        c.negative_lerner = c.lerner < 0.0;
        est.members.push_back(std::move(c));
    }
    return est;
}

} // namespace rankdemand
