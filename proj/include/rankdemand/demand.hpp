#pragma once

#include "rankdemand/dataset.hpp"
#include "rankdemand/statcore.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rankdemand {

/// Regressor labels used in demand designs.
namespace labels {
inline constexpr const char* own_price = "log_price";
inline constexpr const char* related_prefix = "log_price:";
inline constexpr const char* marketplace = "log_marketplace_price";
inline constexpr const char* days_release = "log_days_release";
inline constexpr const char* avg_rating = "avg_rating";
inline constexpr const char* n_reviews = "log_n_reviews";
} // namespace labels

struct DemandSpec {
    /// Candidate controls by name: days_release, avg_rating, n_reviews. Included when present on every aligned row.
    std::vector<std::string> controls{"days_release", "avg_rating", "n_reviews"};
    bool include_marketplace = true;
    std::size_t min_joint_observations = 30;
    stat::CovarianceKind covariance = stat::CovarianceKind::hc0;
};

/// Response and regressors for one focal product, aligned on timestamps, before and after the within transformation.
struct FocalDesign {
    std::string product_id;
    std::vector<std::string> related;    // S_i, in group order
    std::vector<Timestamp> times;
    std::vector<std::string> entities;   // fixed-effect entity per row
    Eigen::MatrixXd raw;                 // untransformed regressors
    Eigen::VectorXd raw_response;        // log sales rank
    std::vector<std::string> column_labels;
    std::vector<std::string> omitted;    // regressors left out because the data lack them
};

/// Builds aligned designs for every member of `group`. Throws InputError when fewer than the minimum rows align.
std::vector<FocalDesign> build_design(const RelationGroup& group, const PanelDataset& panel, const DemandSpec& spec = {});

struct DemandEstimates {
    std::string group_id;
    std::string product_id;
    double phi = 0.0;
    std::map<std::string, double> gammas;  // related product id -> coefficient
    std::optional<double> lambda;
    std::map<std::string, double> controls;
    double intercept = 0.0;  // mean fixed effect of the focal product
    std::map<std::string, double> std_errors;  // by regressor label
    std::vector<std::string> labels;
    Eigen::MatrixXd covariance;
    double r_squared = 0.0;
    std::size_t n_obs = 0;
    std::vector<std::string> dropped;          // regressor labels removed for rank deficiency
    std::vector<std::string> structural_zeros; // related ids whose price column was dropped
    std::vector<std::string> omitted;
};

/// Fixed-effects OLS of log rank on log prices and controls, one regression per group member.
std::vector<DemandEstimates> estimate_demand(const RelationGroup& group, const PanelDataset& panel,
                                             const DemandSpec& spec = {});

/// Shared coefficients across all groups with the same relation and size, by member position, with product fixed effects.
std::map<std::string, std::vector<DemandEstimates>> estimate_demand_pooled(std::span<const RelationGroup> groups,
                                                                           const PanelDataset& panel,
                                                                           const DemandSpec& spec = {});

inline double own_price_elasticity(double phi, double beta) { return beta * phi; }
inline double cross_price_elasticity(double gamma, double beta) { return beta * gamma; }

struct ElasticityMatrix {
    std::string group_id;
    std::vector<std::string> members;
    Eigen::MatrixXd N;  // N(i, j) = elasticity of demand for i with respect to the price of j
    std::vector<std::pair<std::size_t, std::size_t>> structural_zeros;
};

/// Assembles N from per-member estimates (ordered as `members`).
ElasticityMatrix elasticity_matrix(const std::string& group_id, std::span<const std::string> members,
                                   std::span<const DemandEstimates> estimates, double beta);

} // namespace rankdemand
