#pragma once

#include "rankdemand/rankmap.hpp"
#include "rankdemand/statcore.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace rankdemand {

/// p_i Q_i / sum_k p_k Q_k.
Eigen::VectorXd revenue_shares(std::span<const double> prices, std::span<const double> quantities);

enum class RankShareForm {
    consistent,  // s_i = p_i R_i^beta / sum_k p_k R_k^beta
    literal,     // two products only: 1/s_i = 1 + (p_i/p_j)(R_j/R_i)^beta, as printed
};

/// Revenue shares from prices and sales ranks under Q proportional to R^beta.
Eigen::VectorXd shares_from_ranks(std::span<const double> prices, std::span<const double> ranks, double beta,
                                  RankShareForm form = RankShareForm::consistent);

struct MarkupSolution {
    Eigen::VectorXd m;  // Lerner index times revenue share
    double condition = 1.0;
    double residual = 0.0;  // max |s + N'm|
};

/// Solves s + N'm = 0.
MarkupSolution solve_markups(const Eigen::VectorXd& shares, const Eigen::MatrixXd& N,
                             double max_condition = stat::kMaxCondition);

struct MemberCost {
    std::string product_id;
    double price = 0.0;
    double quantity = 0.0;
    double share = 0.0;
    double m = 0.0;
    double lerner = 0.0;
    double marginal_cost = 0.0;
    bool negative_cost = false;     // lerner > 1
    bool negative_lerner = false;   // lerner < 0
};

struct CostEstimate {
    std::string group_id;
    std::vector<MemberCost> members;
    double condition_estimate = 1.0;
    double residual = 0.0;
};

/// lerner_i = m_i / s_i, c_i = p_i (1 - lerner_i). Values are reported even when flagged.
CostEstimate marginal_costs(std::span<const std::string> members, const Eigen::VectorXd& m,
                            const Eigen::VectorXd& shares, std::span<const double> prices);

} // namespace rankdemand
