#include <doctest.h>

#include "helpers.hpp"

#include "rankdemand/errors.hpp"
#include "rankdemand/optimal.hpp"
#include "rankdemand/rankmap.hpp"
#include "rankdemand/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace rankdemand;
using testing_support::at;

namespace {

sim::SimConfig sparse_decay_config(std::uint64_t seed) {
    sim::SimConfig c;
    c.seed = seed;
    c.slots_per_day = 24;
    c.days = 14;
    c.rank_policy = sim::RankPolicy::event_decay;
    c.noise_sigma = 0.0;
    c.price.change_prob = 0.0;
    c.standalone_count = 300;
    c.standalone_log_demand_min = -2.0;
    c.standalone_log_demand_max = 1.0;
    return c;
}

sim::SimConfig group_config(std::uint64_t seed, unsigned threads) {
    std::istringstream in(testing_support::read_file(std::filesystem::path(RANKDEMAND_SOURCE_DIR) /
                                                     "data/sample/panel_sim.ini"));
    auto c = sim::parse_sim_config(in);
    c.seed = seed;
    c.days = 30;
    c.threads = threads;
    return c;
}

using Key = std::pair<std::string, Timestamp>;

} // namespace

TEST_CASE("same seed gives identical files regardless of thread count") {
    const auto a = testing_support::scratch_dir("sim_det_a");
    const auto b = testing_support::scratch_dir("sim_det_b");
    const auto c = testing_support::scratch_dir("sim_det_c");
    sim::write_market(sim::generate_market(group_config(99, 1)), a);
    sim::write_market(sim::generate_market(group_config(99, 4)), b);
    sim::write_market(sim::generate_market(group_config(100, 4)), c);
    for (const char* f : {"observations.csv", "products.csv", "ground_truth.json"}) {
        CHECK(testing_support::read_file(a / f) == testing_support::read_file(b / f));
        CHECK_FALSE(testing_support::read_file(a / f).empty());
    }
    CHECK(testing_support::read_file(a / "observations.csv") != testing_support::read_file(c / "observations.csv"));
}

TEST_CASE("rank ordering examples") {
    const std::vector<std::string> ids{"A", "B"};
    const std::vector<double> s{5.0, 3.0};
    CHECK(sim::rank_by_score(s, ids) == std::vector<double>{1.0, 2.0});
    const std::vector<double> tie{2.0, 2.0};
    CHECK(sim::rank_by_score(tie, ids) == std::vector<double>{1.0, 2.0});
    const std::vector<std::string> rev{"B", "A"};
    CHECK(sim::rank_by_score(tie, rev) == std::vector<double>{2.0, 1.0});
}

TEST_CASE("legacy mode freezes mid-tier ranks until the next day") {
    const std::size_t n = 60000;
    std::vector<std::string> ids(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "P%06zu", i);
        ids[i] = buf;
        scores[i] = static_cast<double>(n - i);
    }
    sim::RankPolicyEngine engine(sim::RankPolicy::legacy_three_tier, ids);
    const std::size_t focal = 49999;
    const std::size_t top = 5;
    auto t = at("2005-01-15T01:00:00Z");
    auto r = engine.apply(scores, t);
    CHECK(r[focal] == 50000.0);
    scores[focal] = 1e9;
    scores[top] = 0.5;
    r = engine.apply(scores, t + std::chrono::hours{1});
    CHECK(r[focal] == 50000.0);
    CHECK(r[top] == static_cast<double>(n));  // top tier refreshes hourly
    r = engine.apply(scores, t + std::chrono::hours{22});
    CHECK(r[focal] == 50000.0);
    r = engine.apply(scores, at("2005-01-16T00:00:00Z"));
    CHECK(r[focal] == 1.0);
}

TEST_CASE("decayed scores halve over one half-life") {
    sim::DecayScores d(2, 24.0);
    d.add(0, 4.0);
    d.advance(std::chrono::hours{24});
    CHECK(d.scores()[0] == doctest::Approx(2.0));
    d.advance(std::chrono::hours{12});
    CHECK(d.scores()[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(d.scores()[1] == 0.0);
}

TEST_CASE("event-decay ranks replay from the purchase log") {
    const auto cfg = sparse_decay_config(3);
    const auto market = sim::generate_market(cfg);
    const auto series = rank_series_from(market.observations);
    REQUIRE(series.size() == cfg.standalone_count);
    std::vector<std::string> ids;
    for (const auto& s : series) ids.push_back(s.product_id);

    std::map<Key, int> bought;
    for (const auto& p : market.truth.purchases) bought[{p.product_id, p.timestamp}] += p.units;
    const auto& times = series.front().times;
    const double ln2 = std::log(2.0);
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<std::pair<double, std::string>> score;
        for (const auto& id : ids) {
            double v = 0.0;
            for (auto it = bought.lower_bound({id, Timestamp::min()}); it != bought.end() && it->first.first == id; ++it) {
                if (it->first.second > times[k]) break;
                const double hours = std::chrono::duration<double, std::ratio<3600>>(times[k] - it->first.second).count();
                v += it->second * std::exp(-ln2 * hours / cfg.half_life_hours);
            }
            score.emplace_back(v, id);
        }
        std::vector<std::size_t> order(ids.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double d = score[a].first - score[b].first;
            if (std::abs(d) > 1e-9 * std::max(1.0, score[a].first)) return d > 0;
            return score[a].second < score[b].second;
        });
        std::vector<double> seen(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) seen[i] = series[i].ranks[k];
        for (std::size_t pos = 0; pos < order.size(); ++pos)
            if (seen[order[pos]] != static_cast<double>(pos + 1)) ++mismatches;
        // Published ranks are a permutation of 1..n.
        std::sort(seen.begin(), seen.end());
        for (std::size_t i = 0; i < seen.size(); ++i) REQUIRE(seen[i] == static_cast<double>(i + 1));
    }
    CHECK(mismatches == 0);
}

TEST_CASE("detected rank spikes are logged purchases") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto market = sim::generate_market(sparse_decay_config(seed));
        std::set<Key> logged;
        for (const auto& p : market.truth.purchases) logged.insert({p.product_id, p.timestamp});
        SpikeParams lenient;
        lenient.theta = 1e-12;
        lenient.min_abs_drop = 1e-12;
        std::size_t strict_hits = 0, lenient_hits = 0;
        for (const auto& s : rank_series_from(market.observations)) {
            for (const auto& e : detect_purchases(s, {})) {
                CHECK(logged.count({e.product_id, e.timestamp}) == 1);
                ++strict_hits;
            }
            for (const auto& e : detect_purchases(s, lenient)) {
                CHECK(logged.count({e.product_id, e.timestamp}) == 1);
                ++lenient_hits;
            }
        }
        CHECK(strict_hits > 0);
        CHECK(static_cast<double>(lenient_hits) >= 0.98 * static_cast<double>(logged.size()));
    }
}

TEST_CASE("purchase totals agree with expected demand") {
    int within = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
        auto cfg = sparse_decay_config(static_cast<std::uint64_t>(1000 + seed));
        cfg.standalone_count = 60;
        cfg.standalone_log_demand_min = 0.0;
        cfg.standalone_log_demand_max = 3.0;
        const auto market = sim::generate_market(cfg);
        const double slot_weeks = 1.0 / (7.0 * cfg.slots_per_day);
        double expected = 0.0;
        for (const auto& o : market.observations) {
            const auto* t = market.truth.find(o.product_id);
            REQUIRE(t != nullptr);
            const double eta = t->elasticities.at(o.product_id);
            expected += std::exp(t->log_demand + eta * std::log(*o.amazon_price / t->anchor_price)) * slot_weeks;
        }
        double total = 0.0;
        for (const auto& p : market.truth.purchases) total += p.units;
        if (std::abs(total - expected) <= 3.0 * std::sqrt(expected)) ++within;
    }
    CHECK(within >= 19);
}

TEST_CASE("noiseless direct ranks map back to true demand within the rounding step") {
    sim::SimConfig cfg;
    cfg.seed = 8;
    cfg.days = 20;
    cfg.noise_sigma = 0.0;
    cfg.price.change_prob = 0.2;
    cfg.standalone_count = 30;
    cfg.standalone_log_demand_max = 5.0;
    const auto market = sim::generate_market(cfg);
    for (const auto& o : market.observations) {
        const auto* t = market.truth.find(o.product_id);
        const double q = std::exp(t->log_demand + t->elasticities.at(o.product_id) * std::log(*o.amazon_price / t->anchor_price));
        const double r = *o.sales_rank;
        const double step = rank_to_quantity(std::max(1.0, r - 0.5), cfg.calibration_truth) -
                            rank_to_quantity(r + 0.5, cfg.calibration_truth);
        if (r > 1.0) CHECK(std::abs(rank_to_quantity(r, cfg.calibration_truth) - q) <= step);
    }
}

TEST_CASE("optimal price examples") {
    Eigen::MatrixXd N(1, 1);
    N << -2.0;
    const auto p = sim::solve_optimal_prices(N, Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, 2.0),
                                             Eigen::VectorXd::Constant(1, 30.0));
    REQUIRE(p.has_value());
    CHECK((*p)(0) == doctest::Approx(10.0).epsilon(1e-10));

    Eigen::MatrixXd N2(2, 2);
    N2 << -2.5, 0.4, 0.4, -2.5;
    const auto p2 = sim::solve_optimal_prices(N2, Eigen::Vector2d(20.0, 20.0), Eigen::Vector2d(3.0, 3.0),
                                              Eigen::Vector2d(100.0, 100.0));
    REQUIRE(p2.has_value());
    CHECK((*p2)(0) == doctest::Approx((*p2)(1)).epsilon(1e-12));

    ProfitModel m;
    m.members = {"A", "B"};
    m.prices = *p2;
    m.costs = Eigen::Vector2d(20.0, 20.0);
    m.quantities = sim::model_quantities(N2, Eigen::Vector2d(3.0, 3.0), Eigen::Vector2d(100.0, 100.0), *p2);
    m.N = N2;
    CHECK(normalized_gradient(m, profit_gradient(m)).cwiseAbs().maxCoeff() <= 1e-9);
    m.costs = m.prices;
    const auto v = classify(m, profit_gradient(m));
    CHECK(v[0].classification == PriceVerdict::underpriced);
    CHECK(v[0].gradient == doctest::Approx(m.quantities(0)));

    Eigen::MatrixXd inelastic(1, 1);
    inelastic << -0.8;
    CHECK_FALSE(sim::solve_optimal_prices(inelastic, Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, 2.0),
                                          Eigen::VectorXd::Constant(1, 30.0))
                    .has_value());
}

TEST_CASE("ground truth optimal prices satisfy the first-order conditions") {
    auto cfg = group_config(5, 2);
    for (auto& g : cfg.groups) g.start_at_optimum = true;
    const auto market = sim::generate_market(cfg);
    REQUIRE(market.truth.groups.size() == 4);
    for (const auto& g : market.truth.groups) {
        REQUIRE(g.optimal_prices.has_value());
        CHECK(g.max_optimal_gradient <= 1e-9);
        for (std::size_t i = 0; i < g.members.size(); ++i) {
            const auto* t = market.truth.find(g.members[i]);
            CHECK(t->optimal_price.value() == doctest::Approx((*g.optimal_prices)(static_cast<Eigen::Index>(i))));
        }
    }
    const auto json = sim::ground_truth_report(market.truth);
    CHECK(json.find("\"first_order_conditions_hold\": true") != std::string::npos);
}

TEST_CASE("standalone monopoly truth uses the inverse-elasticity price") {
    sim::SimConfig cfg;
    cfg.days = 2;
    cfg.standalone_count = 3;
    cfg.calibration_truth.beta = -0.8;
    cfg.standalone_phi = 2.5;
    const auto market = sim::generate_market(cfg);
    for (const auto& t : market.truth.products) CHECK(t.optimal_price.value() == doctest::Approx(2.0 * t.cost));
}

TEST_CASE("drops blank prices and are logged") {
    auto cfg = sparse_decay_config(4);
    cfg.rank_policy = sim::RankPolicy::direct_pareto;
    cfg.standalone_count = 20;
    cfg.drop_rate = 0.05;
    const auto market = sim::generate_market(cfg);
    std::size_t blanks = 0;
    for (const auto& o : market.observations)
        if (!o.amazon_price) ++blanks;
    CHECK(blanks == market.truth.drops.size());
    CHECK(blanks > 0);
}

TEST_CASE("config parsing and validation") {
    std::istringstream ok("seed = 4\ndays = 3\nrank_policy = legacy_three_tier\n[group.1]\nrelation = versions\n"
                          "members = 2\nphi = 2, 2\ngamma = 0, -1, -1, 0\nanchor_price = 100, 50\nlog_demand = 2, 2\n");
    const auto c = sim::parse_sim_config(ok);
    CHECK(c.seed == 4);
    CHECK(c.rank_policy == sim::RankPolicy::legacy_three_tier);
    REQUIRE(c.groups.size() == 1);
    CHECK(c.groups[0].gamma.size() == 4);

    std::istringstream unknown("seed = 4\nspeed = 9\n");
    CHECK_THROWS_AS(sim::parse_sim_config(unknown), InputError);
    std::istringstream bad_dims("[group.1]\nrelation = versions\nmembers = 2\nphi = 2, 2, 2\n");
    CHECK_THROWS_AS(sim::parse_sim_config(bad_dims), InputError);
    std::istringstream bad_policy("rank_policy = hourly\n");
    CHECK_THROWS_AS(sim::parse_sim_config(bad_policy), InputError);

    sim::SimConfig v;
    v.calibration_truth.beta = 0.5;
    CHECK_THROWS_AS(v.validate(), InputError);
    v = {};
    v.slots_per_day = 7;
    CHECK_THROWS_AS(v.validate(), InputError);
}
