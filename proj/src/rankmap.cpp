#include "rankdemand/rankmap.hpp"

#include "rankdemand/dataset.hpp"
#include "rankdemand/errors.hpp"
#include "rankdemand/statcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace rankdemand {

std::vector<RankSeries> rank_series_from(std::span<const PanelObservation> rows) {
    std::map<std::string, std::vector<std::pair<Timestamp, double>>> by_product;
    for (const auto& r : rows)
        if (r.sales_rank) by_product[r.product_id].emplace_back(r.timestamp, *r.sales_rank);
    std::vector<RankSeries> out;
    for (auto& [id, points] : by_product) {
        std::stable_sort(points.begin(), points.end(), [](auto& a, auto& b) { return a.first < b.first; });
        RankSeries s{id, {}, {}};
        for (const auto& [t, r] : points) {
            s.times.push_back(t);
            s.ranks.push_back(r);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PurchaseEvent> detect_purchases(const RankSeries& series, const SpikeParams& params) {
    if (series.times.size() != series.ranks.size()) throw InputError("rank series: times and ranks differ in length");
    for (std::size_t i = 1; i < series.times.size(); ++i)
        if (!(series.times[i - 1] < series.times[i]))
            throw InputError("rank series for " + series.product_id + " is not strictly increasing in time");
    std::vector<PurchaseEvent> events;
    for (std::size_t i = 1; i < series.ranks.size(); ++i) {
        const double before = series.ranks[i - 1];
        const double after = series.ranks[i];
        const double drop = before - after;
        if (drop <= 0.0) continue;
        if (drop / before >= params.theta && drop >= params.min_abs_drop) {
            PurchaseEvent e{series.product_id, series.times[i], before, after, 1};
            if (params.units) e.units = params.units(e);
            if (e.units < 1) throw InputError("units function returned fewer than one unit");
            events.push_back(std::move(e));
        }
    }
    return events;
}

std::vector<DemandRankPair> weekly_aggregate(std::span<const PurchaseEvent> events, const RankSeries& series,
                                             double demand_bound) {
    std::vector<DemandRankPair> pairs;
    if (series.times.size() < 2) return pairs;
    const auto start = series.times.front();
    const auto week = std::chrono::seconds{std::chrono::days{7}};
    auto min_step = series.times[1] - series.times[0];
    for (std::size_t i = 2; i < series.times.size(); ++i) min_step = std::min(min_step, series.times[i] - series.times[i - 1]);
    // A week counts as complete when the series reaches its final slot.
    const auto covered = series.times.back() + min_step - start;
    const auto full_weeks = static_cast<int>(covered / week);

    for (int w = 0; w < full_weeks; ++w) {
        const auto lo = start + w * week;
        const auto hi = lo + week;
        double rank_sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < series.times.size(); ++i)
            if (series.times[i] >= lo && series.times[i] < hi) {
                rank_sum += series.ranks[i];
                ++n;
            }
        if (n == 0) continue;
        double units = 0.0;
        for (const auto& e : events)
            if (e.product_id == series.product_id && e.timestamp >= lo && e.timestamp < hi) units += e.units;
        DemandRankPair p{series.product_id, w, units, rank_sum / static_cast<double>(n), false};
        p.implausible = units > demand_bound;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

ParetoCalibration fit_pareto(std::span<const DemandRankPair> pairs) {
    if (pairs.size() < 3) throw InputError("fit_pareto: need at least 3 (demand, rank) pairs");
    std::set<double> distinct;
    for (const auto& p : pairs) {
        if (!(p.avg_sales_rank >= 1.0)) throw InputError("fit_pareto: average rank below 1");
        if (!(p.avg_weekly_demand >= 0.0)) throw InputError("fit_pareto: negative demand");
        distinct.insert(p.avg_sales_rank);
    }
    if (distinct.size() < 2) throw NumericalError("fit_pareto: degenerate pairs (all ranks equal)");

    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        X(i, 1) = std::log(p.avg_sales_rank);
        y(i) = std::log(p.avg_weekly_demand + 1.0);
    }
    const auto fit = stat::ols_fit(stat::DesignMatrix(X, {"log_alpha", "beta"}), y);
    if (!fit.dropped_columns.empty()) throw NumericalError("fit_pareto: degenerate design");
    ParetoCalibration cal;
    cal.intercept = fit.coefficient("log_alpha");
    cal.beta = fit.coefficient("beta");
    cal.se_intercept = fit.std_error("log_alpha");
    cal.se_beta = fit.std_error("beta");
    cal.n_pairs = static_cast<int>(pairs.size());
    if (!(cal.beta < 0.0))
        throw NumericalError("fit_pareto: fitted beta " + format_number(cal.beta) + " is not negative");
    return cal;
}

double rank_to_quantity(double rank, const ParetoCalibration& cal) {
    if (!(rank >= 1.0)) throw InputError("rank_to_quantity: rank must be >= 1");
    return std::max(std::exp(cal.intercept + cal.beta * std::log(rank)) - 1.0, 0.0);
}

double quantity_to_rank(double quantity, const ParetoCalibration& cal) {
    if (!(quantity >= 0.0)) throw InputError("quantity_to_rank: quantity must be >= 0");
    if (!(cal.beta < 0.0)) throw InputError("quantity_to_rank: beta must be negative");
    const double rank = std::exp((std::log(quantity + 1.0) - cal.intercept) / cal.beta);
    return std::max(rank, 1.0);
}

CheckpointReview review_checkpoints(const ParetoCalibration& cal) {
    CheckpointReview review;
    double mx = 0.0, my = 0.0;
    for (const auto& c : kPublishedCheckpoints) {
        mx += std::log(c.rank);
        my += std::log(c.weekly_units + 1.0);
    }
    const double n = std::size(kPublishedCheckpoints);
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& c : kPublishedCheckpoints) {
        const double dx = std::log(c.rank) - mx;
        sxy += dx * (std::log(c.weekly_units + 1.0) - my);
        sxx += dx * dx;
    }
    review.checkpoint_slope = sxy / sxx;
    review.checkpoint_intercept = my - review.checkpoint_slope * mx;

    char buf[512];
    std::string implied;
    for (const auto& c : kPublishedCheckpoints) {
        const double q = rank_to_quantity(c.rank, cal);
        review.implied_units.push_back(q);
        std::snprintf(buf, sizeof buf, "%s rank %.0f -> %.2f units/week (checkpoint %.0f)", implied.empty() ? "" : ";",
                      c.rank, q, c.weekly_units);
        implied += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "The published rank/sales checkpoints (3100->2, 440->10, 150->25 units/week) imply a slope of %.3f "
                  "in log(Q+1) vs log(rank), not the published beta of %.3f; neither alpha = %.3f nor log(alpha) = "
                  "%.3f reproduces them. Calibration in use (intercept %.4f, beta %.4f) implies:",
                  review.checkpoint_slope, kPublishedBeta, kPublishedIntercept, kPublishedIntercept, cal.intercept,
                  cal.beta);
    review.note = std::string(buf) + implied + ".";
    return review;
}

} // namespace rankdemand
