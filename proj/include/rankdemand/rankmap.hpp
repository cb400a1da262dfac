#pragma once

#include "rankdemand/timeutil.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rankdemand {

struct PanelObservation;

/// Pareto rank-to-demand mapping log(Q + 1) = intercept + beta * log(rank), natural log.
struct ParetoCalibration {
    double intercept = 0.0;  // log(alpha)
    double beta = -1.0;
    double se_intercept = 0.0;
    double se_beta = 0.0;
    int n_pairs = 0;
};

/// Hourly (or other cadence) rank series for one product.
struct RankSeries {
    std::string product_id;
    std::vector<Timestamp> times;
    std::vector<double> ranks;
};

struct PurchaseEvent {
    std::string product_id;
    Timestamp timestamp{};  // time of the improved rank
    double rank_before = 0.0;
    double rank_after = 0.0;
    int units = 1;

    bool operator==(const PurchaseEvent&) const = default;
};

struct SpikeParams {
    double theta = 0.30;          // minimum relative improvement
    double min_abs_drop = 100.0;  // minimum improvement in rank positions
    /// Optional override of units per spike; defaults to one unit.
    std::function<int(const PurchaseEvent&)> units;
};

struct DemandRankPair {
    std::string product_id;
    int week = 0;
    double avg_weekly_demand = 0.0;
    double avg_sales_rank = 1.0;
    bool implausible = false;  // demand above the plausibility bound
};

inline constexpr double kDefaultDemandBound = 1000.0;

/// Builds per-product rank series from panel rows that carry a rank, sorted by time.
std::vector<RankSeries> rank_series_from(std::span<const PanelObservation> rows);

/// Events at steps whose rank improvement passes both thresholds. Throws InputError unless times strictly increase.
std::vector<PurchaseEvent> detect_purchases(const RankSeries& series, const SpikeParams& params = {});

/// Per full seven-day week from the series start: Q = event units, rank = mean observed rank. Partial trailing weeks dropped.
std::vector<DemandRankPair> weekly_aggregate(std::span<const PurchaseEvent> events, const RankSeries& series,
                                             double demand_bound = kDefaultDemandBound);

/// OLS of log(Q + 1) on log(rank) with HC0 standard errors. Rejects non-negative slopes.
ParetoCalibration fit_pareto(std::span<const DemandRankPair> pairs);

double rank_to_quantity(double rank, const ParetoCalibration& cal);
double quantity_to_rank(double quantity, const ParetoCalibration& cal);

/// Sales-rank/weekly-unit checkpoints quoted alongside the published calibration.
struct RankCheckpoint {
    double rank;
    double weekly_units;
};
inline constexpr RankCheckpoint kPublishedCheckpoints[] = {{3100.0, 2.0}, {440.0, 10.0}, {150.0, 25.0}};
inline constexpr double kPublishedIntercept = 8.352;
inline constexpr double kPublishedBeta = -0.828;

struct CheckpointReview {
    double checkpoint_slope = 0.0;      // OLS slope through the checkpoints in log(Q+1)/log(rank) space
    double checkpoint_intercept = 0.0;
    std::vector<double> implied_units;  // rank_to_quantity at each checkpoint rank under the reviewed calibration
    std::string note;
};

/// Compares a calibration against the published checkpoints and explains the mismatch.
CheckpointReview review_checkpoints(const ParetoCalibration& cal);

} // namespace rankdemand
