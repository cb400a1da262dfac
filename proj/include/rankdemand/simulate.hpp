#pragma once

#include "rankdemand/dataset.hpp"
#include "rankdemand/rankmap.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rankdemand::sim {

enum class RankPolicy { direct_pareto, event_decay, legacy_three_tier };
std::string_view to_string(RankPolicy p);
std::optional<RankPolicy> parse_rank_policy(std::string_view token);

/// One related-product group to synthesize. Per-member vectors are indexed by member position;
/// `gamma` is members x members row-major (diagonal ignored). Coefficients are on the log-rank scale.
struct GroupTemplate {
    Relation relation = Relation::versions;
    Category category = Category::business_productivity;
    std::size_t members = 2;
    std::size_t count = 1;
    std::vector<double> phi;
    std::vector<double> gamma;
    std::vector<double> lambda;
    std::vector<double> omega_days;
    std::vector<double> omega_reviews;
    std::vector<double> cost;
    std::vector<double> anchor_price;
    std::vector<double> log_demand;         // log weekly demand at anchor prices and initial controls
    std::vector<double> marketplace_ratio;  // base marketplace price / anchor price; 0 disables the column
    bool start_at_optimum = false;
};

struct PriceProcess {
    double change_prob = 0.02;  // per slot
    double log_step = 0.1;
    double max_log_dev = 0.5;   // reflecting bound on |log p - log p_base|
    std::size_t hold_slots = 0; // prices pinned at base for the first slots
};

struct SimConfig {
    std::uint64_t seed = 42;
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2005} / 1 / 15}};
    int slots_per_day = 3;
    int days = 300;
    RankPolicy rank_policy = RankPolicy::direct_pareto;
    double half_life_hours = 24.0;
    ParetoCalibration calibration_truth{kPublishedIntercept, kPublishedBeta, 0.0, 0.0, 0};
    /// 1 reproduces log(Q + 1) = intercept + beta log R; 0 uses the pure power law log Q = intercept + beta log R.
    double pareto_offset = 1.0;
    bool integer_ranks = true;
    double noise_sigma = 0.2;       // log-demand noise
    double rank_noise_sigma = 0.0;  // multiplicative noise on published ranks
    double drop_rate = 0.0;         // probability a slot's amazon_price is not captured
    PriceProcess price;
    std::vector<GroupTemplate> groups;
    std::size_t standalone_count = 0;
    double standalone_log_demand_min = 0.0;
    double standalone_log_demand_max = 3.0;
    double standalone_phi = 2.0;
    double standalone_cost_ratio = 0.5;  // cost / anchor price
    double standalone_price_min = 20.0;
    double standalone_price_max = 400.0;
    double list_markup = 1.1;
    int release_days_min = 60;
    int release_days_max = 700;
    unsigned threads = 1;

    std::size_t slots() const { return static_cast<std::size_t>(slots_per_day) * static_cast<std::size_t>(days); }
    std::chrono::seconds slot_length() const { return std::chrono::seconds{86400 / slots_per_day}; }
    /// Throws InputError on inconsistent template dimensions or out-of-range settings.
    void validate() const;
};

/// Reads an INI-style key/value file (top-level keys plus one [group.N] section per template).
SimConfig parse_sim_config(std::istream& in);
SimConfig load_sim_config(const std::filesystem::path& path);

struct ProductTruth {
    std::string product_id;
    std::string group_id;  // empty for standalone
    double phi = 0.0;
    std::map<std::string, double> gammas;
    double lambda = 0.0;
    double omega_days = 0.0;
    double omega_reviews = 0.0;
    std::map<std::string, double> elasticities;  // demand elasticity w.r.t. each price in the group (own included)
    double cost = 0.0;
    double anchor_price = 0.0;
    double base_price = 0.0;
    std::optional<double> optimal_price;
    double log_demand = 0.0;
    std::optional<double> marketplace_base;
};

struct LoggedPurchase {
    std::string product_id;
    Timestamp timestamp{};
    int units = 1;
};

struct LoggedDrop {
    std::string product_id;
    Timestamp timestamp{};
};

struct GroupTruth {
    std::string group_id;
    std::vector<std::string> members;
    Eigen::MatrixXd elasticities;       // true N
    std::optional<Eigen::VectorXd> optimal_prices;
    std::optional<Eigen::VectorXd> optimal_quantities;  // weekly demand at the optimum (reference state)
    double max_optimal_gradient = 0.0;  // max |normalized gradient| at the optimum
};

struct GroundTruth {
    SimConfig config;
    std::vector<ProductTruth> products;  // sorted by product_id
    std::vector<GroupTruth> groups;      // sorted by group_id
    std::vector<LoggedPurchase> purchases;
    std::vector<LoggedDrop> drops;

    const ProductTruth* find(std::string_view id) const;
    const GroupTruth* find_group(std::string_view id) const;
};

struct SimulatedMarket {
    Catalog catalog;
    std::vector<PanelObservation> observations;  // canonical (product_id, timestamp) order
    GroundTruth truth;
};

SimulatedMarket generate_market(const SimConfig& config);

/// Writes observations.csv, products.csv and ground_truth.json into `dir`.
void write_market(const SimulatedMarket& market, const std::filesystem::path& dir);

/// Ranks by descending score, ties by ascending id; result[i] is the rank of product i.
std::vector<double> rank_by_score(std::span<const double> scores, std::span<const std::string> ids);

/// Applies a rank publication policy to per-product scores over successive times.
/// event_decay and legacy_three_tier rank decayed purchase scores; direct_pareto maps scores (weekly demand) through
/// the calibration.
class RankPolicyEngine {
public:
    RankPolicyEngine(RankPolicy policy, std::vector<std::string> ids, ParetoCalibration calibration = {},
                     double pareto_offset = 1.0, bool integer_ranks = true);

    std::vector<double> apply(std::span<const double> scores, Timestamp t);

private:
    RankPolicy policy_;
    std::vector<std::string> ids_;
    ParetoCalibration calibration_;
    double offset_;
    bool integer_;
    std::vector<double> published_;
    std::vector<Timestamp> updated_;
};

/// Exponentially decaying purchase score: s <- s * 2^(-dt / half_life) + units.
class DecayScores {
public:
    DecayScores(std::size_t n, double half_life_hours);
    void advance(std::chrono::seconds dt);
    void add(std::size_t product, double units) { scores_[product] += units; }
    std::span<const double> scores() const { return scores_; }

private:
    std::vector<double> scores_;
    double half_life_hours_;
};

/// Profit-maximizing prices for constant-elasticity demand Q_a = exp(L_a) prod_b (p_b / anchor_b)^N(a,b),
/// by damped fixed-point iteration on the markup equations, falling back to Newton on the normalized
/// first-order conditions. Empty when no interior optimum is found.
std::optional<Eigen::VectorXd> solve_optimal_prices(const Eigen::MatrixXd& N, const Eigen::VectorXd& costs,
                                                    const Eigen::VectorXd& log_demand, const Eigen::VectorXd& anchor);

/// Weekly demand of the constant-elasticity model at prices `p`.
Eigen::VectorXd model_quantities(const Eigen::MatrixXd& N, const Eigen::VectorXd& log_demand,
                                 const Eigen::VectorXd& anchor, const Eigen::VectorXd& p);

/// Ground truth as JSON text (stable key order).
std::string ground_truth_report(const GroundTruth& truth);

} // namespace rankdemand::sim
