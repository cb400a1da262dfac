#include "rankdemand/simulate.hpp"

#include "rankdemand/artifacts.hpp"
#include "rankdemand/errors.hpp"
#include "rankdemand/optimal.hpp"
#include "rankdemand/statcore.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace rankdemand::sim {

std::string_view to_string(RankPolicy p) {
    switch (p) {
    case RankPolicy::direct_pareto: return "direct_pareto";
    case RankPolicy::event_decay: return "event_decay";
    case RankPolicy::legacy_three_tier: return "legacy_three_tier";
    }
    return "unknown";
}

std::optional<RankPolicy> parse_rank_policy(std::string_view t) {
    if (t == "direct_pareto") return RankPolicy::direct_pareto;
    if (t == "event_decay") return RankPolicy::event_decay;
    if (t == "legacy_three_tier") return RankPolicy::legacy_three_tier;
    return std::nullopt;
}

void SimConfig::validate() const {
    if (slots_per_day < 1 || 86400 % slots_per_day != 0) throw InputError("sim: slots_per_day must divide a day");
    if (days < 1) throw InputError("sim: days must be positive");
    if (!(calibration_truth.beta < 0.0)) throw InputError("sim: calibration beta must be negative");
    if (pareto_offset != 0.0 && pareto_offset != 1.0) throw InputError("sim: pareto_offset must be 0 or 1");
    if (noise_sigma < 0.0 || rank_noise_sigma < 0.0) throw InputError("sim: noise must be non-negative");
    if (drop_rate < 0.0 || drop_rate >= 1.0) throw InputError("sim: drop_rate must be in [0, 1)");
    if (price.change_prob < 0.0 || price.change_prob > 1.0) throw InputError("sim: price change probability out of range");
    if (price.max_log_dev < 0.0 || price.log_step < 0.0) throw InputError("sim: price process parameters must be >= 0");
    if (!(half_life_hours > 0.0)) throw InputError("sim: half-life must be positive");
    if (release_days_min < 0 || release_days_max < release_days_min) throw InputError("sim: bad release-day range");
    if (standalone_log_demand_max < standalone_log_demand_min) throw InputError("sim: bad standalone demand range");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& t = groups[g];
        const auto where = "sim group template " + std::to_string(g + 1) + ": ";
        const auto m = t.members;
        if (m < 2) throw InputError(where + "needs at least 2 members");
        auto check = [&](const std::vector<double>& v, std::size_t n, const char* name, bool optional) {
            if (v.empty() && optional) return;
            if (v.size() != n)
                throw InputError(where + name + " has " + std::to_string(v.size()) + " entries, expected " +
                                 std::to_string(n));
        };
        check(t.phi, m, "phi", false);
        check(t.gamma, m * m, "gamma", false);
        check(t.lambda, m, "lambda", true);
        check(t.omega_days, m, "omega_days", true);
        check(t.omega_reviews, m, "omega_reviews", true);
        check(t.cost, m, "cost", true);
        check(t.anchor_price, m, "anchor_price", false);
        check(t.log_demand, m, "log_demand", false);
        check(t.marketplace_ratio, m, "marketplace_ratio", true);
        for (double p : t.anchor_price)
            if (!(p > 0.0)) throw InputError(where + "anchor prices must be positive");
        if (t.start_at_optimum && t.cost.empty()) throw InputError(where + "start_at_optimum needs costs");
        if (t.relation == Relation::generations && m != 2) throw InputError(where + "generation groups have 2 members");
    }
}

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("sim config: bad number '" + item + "' in " + key);
        }
    }
    return out;
}

template <typename T>
T get_value(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
    auto v = pt.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '/'));
    if (!v) return fallback;
    std::istringstream in(*v);
    T out{};
    if constexpr (std::is_same_v<T, bool>) {
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw InputError("sim config: bad boolean for " + key);
    } else {
        if (!(in >> out) || !(in >> std::ws).eof()) throw InputError("sim config: bad value for " + key + ": " + *v);
    }
    return out;
}

} // namespace

SimConfig parse_sim_config(std::istream& in) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("sim config: ") + e.what());
    }
    SimConfig c;
    static const std::set<std::string> known{"seed", "start", "slots_per_day", "days", "rank_policy", "half_life_hours",
        "calibration_intercept", "calibration_beta", "pareto_offset", "integer_ranks", "noise_sigma",
        "rank_noise_sigma", "drop_rate", "price_change_prob", "price_log_step", "price_max_log_dev",
        "price_hold_slots", "standalone_count", "standalone_log_demand_min", "standalone_log_demand_max",
        "standalone_phi", "standalone_cost_ratio", "standalone_price_min", "standalone_price_max", "list_markup",
        "release_days_min", "release_days_max", "threads"};
    for (const auto& [key, node] : pt) {
        if (node.empty() && !known.count(key)) throw InputError("sim config: unknown key '" + key + "'");
        if (!node.empty() && key.rfind("group.", 0) != 0) throw InputError("sim config: unknown section [" + key + "]");
    }

    c.seed = get_value<std::uint64_t>(pt, "seed", c.seed);
    if (auto s = pt.get_optional<std::string>("start")) {
        auto t = parse_timestamp(*s);
        if (!t) throw InputError("sim config: bad start timestamp " + *s);
        c.start = *t;
    }
    c.slots_per_day = get_value(pt, "slots_per_day", c.slots_per_day);
    c.days = get_value(pt, "days", c.days);
    if (auto s = pt.get_optional<std::string>("rank_policy")) {
        auto p = parse_rank_policy(*s);
        if (!p) throw InputError("sim config: unknown rank_policy " + *s);
        c.rank_policy = *p;
    }
    c.half_life_hours = get_value(pt, "half_life_hours", c.half_life_hours);
    c.calibration_truth.intercept = get_value(pt, "calibration_intercept", c.calibration_truth.intercept);
    c.calibration_truth.beta = get_value(pt, "calibration_beta", c.calibration_truth.beta);
    c.pareto_offset = get_value(pt, "pareto_offset", c.pareto_offset);
    c.integer_ranks = get_value(pt, "integer_ranks", c.integer_ranks);
    c.noise_sigma = get_value(pt, "noise_sigma", c.noise_sigma);
    c.rank_noise_sigma = get_value(pt, "rank_noise_sigma", c.rank_noise_sigma);
    c.drop_rate = get_value(pt, "drop_rate", c.drop_rate);
    c.price.change_prob = get_value(pt, "price_change_prob", c.price.change_prob);
    c.price.log_step = get_value(pt, "price_log_step", c.price.log_step);
    c.price.max_log_dev = get_value(pt, "price_max_log_dev", c.price.max_log_dev);
    c.price.hold_slots = get_value(pt, "price_hold_slots", c.price.hold_slots);
    c.standalone_count = get_value(pt, "standalone_count", c.standalone_count);
    c.standalone_log_demand_min = get_value(pt, "standalone_log_demand_min", c.standalone_log_demand_min);
    c.standalone_log_demand_max = get_value(pt, "standalone_log_demand_max", c.standalone_log_demand_max);
    c.standalone_phi = get_value(pt, "standalone_phi", c.standalone_phi);
    c.standalone_cost_ratio = get_value(pt, "standalone_cost_ratio", c.standalone_cost_ratio);
    c.standalone_price_min = get_value(pt, "standalone_price_min", c.standalone_price_min);
    c.standalone_price_max = get_value(pt, "standalone_price_max", c.standalone_price_max);
    c.list_markup = get_value(pt, "list_markup", c.list_markup);
    c.release_days_min = get_value(pt, "release_days_min", c.release_days_min);
    c.release_days_max = get_value(pt, "release_days_max", c.release_days_max);
    c.threads = get_value(pt, "threads", c.threads);

    std::vector<std::pair<int, GroupTemplate>> templates;
    for (const auto& [key, node] : pt) {
        if (node.empty()) continue;
        int index = 0;
        try {
            index = std::stoi(key.substr(6));
        } catch (const std::exception&) {
            throw InputError("sim config: bad section name [" + key + "]");
        }
        GroupTemplate t;
        for (const auto& [k, v] : node) {
            const auto value = v.get_value<std::string>();
            const auto where = key + "." + k;
            if (k == "relation") {
                auto r = parse_relation(value);
                if (!r) throw InputError("sim config: unknown relation " + value);
                t.relation = *r;
            } else if (k == "category") {
                auto cat = parse_category(value);
                if (!cat) throw InputError("sim config: unknown category " + value);
                t.category = *cat;
            } else if (k == "members") {
                t.members = static_cast<std::size_t>(std::stoul(value));
            } else if (k == "count") {
                t.count = static_cast<std::size_t>(std::stoul(value));
            } else if (k == "start_at_optimum") {
                t.start_at_optimum = value == "true" || value == "1";
            } else if (k == "phi") t.phi = parse_list(value, where);
            else if (k == "gamma") t.gamma = parse_list(value, where);
            else if (k == "lambda") t.lambda = parse_list(value, where);
            else if (k == "omega_days") t.omega_days = parse_list(value, where);
            else if (k == "omega_reviews") t.omega_reviews = parse_list(value, where);
            else if (k == "cost") t.cost = parse_list(value, where);
            else if (k == "anchor_price") t.anchor_price = parse_list(value, where);
            else if (k == "log_demand") t.log_demand = parse_list(value, where);
            else if (k == "marketplace_ratio") t.marketplace_ratio = parse_list(value, where);
            else throw InputError("sim config: unknown key " + where);
        }
        templates.emplace_back(index, std::move(t));
    }
    std::sort(templates.begin(), templates.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (auto& [i, t] : templates) c.groups.push_back(std::move(t));
    c.validate();
    return c;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open sim config " + path.string());
    return parse_sim_config(in);
}

const ProductTruth* GroundTruth::find(std::string_view id) const {
    auto it = std::lower_bound(products.begin(), products.end(), id,
                               [](const ProductTruth& p, std::string_view v) { return p.product_id < v; });
    return it != products.end() && it->product_id == id ? &*it : nullptr;
}

const GroupTruth* GroundTruth::find_group(std::string_view id) const {
    for (const auto& g : groups)
        if (g.group_id == id) return &g;
    return nullptr;
}

std::vector<double> rank_by_score(std::span<const double> scores, std::span<const std::string> ids) {
    if (scores.size() != ids.size()) throw InputError("rank_by_score: size mismatch");
    for (double s : scores)
        if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("rank_by_score: scores must be finite and >= 0");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    std::vector<double> ranks(scores.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = static_cast<double>(pos + 1);
    return ranks;
}

RankPolicyEngine::RankPolicyEngine(RankPolicy policy, std::vector<std::string> ids, ParetoCalibration calibration,
                                   double pareto_offset, bool integer_ranks)
    : policy_(policy), ids_(std::move(ids)), calibration_(calibration), offset_(pareto_offset), integer_(integer_ranks) {}

std::vector<double> RankPolicyEngine::apply(std::span<const double> scores, Timestamp t) {
    if (scores.size() != ids_.size()) throw InputError("rank policy: score count does not match products");
    if (policy_ == RankPolicy::direct_pareto) {
        std::vector<double> ranks(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (!(scores[i] >= 0.0)) throw InputError("rank policy: quantities must be >= 0");
            double r = std::exp((std::log(scores[i] + offset_) - calibration_.intercept) / calibration_.beta);
            if (integer_) r = std::round(r);
            ranks[i] = std::max(r, 1.0);
        }
        return ranks;
    }
    auto fresh = rank_by_score(scores, ids_);
    if (policy_ == RankPolicy::event_decay || published_.empty()) {
        published_ = fresh;
        updated_.assign(ids_.size(), t);
        return published_;
    }
    // Legacy: refresh cadence depends on the tier of the currently published rank.
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        const double current = published_[i];
        bool refresh = true;
        if (current > 100000.0) {
            const std::chrono::year_month_day last{std::chrono::floor<std::chrono::days>(updated_[i])};
            refresh = last.year() != ymd.year() || last.month() != ymd.month();
        } else if (current > 10000.0) {
            refresh = std::chrono::floor<std::chrono::days>(updated_[i]) != day;
        }
        if (refresh) {
            published_[i] = fresh[i];
            updated_[i] = t;
        }
    }
    return published_;
}

DecayScores::DecayScores(std::size_t n, double half_life_hours) : scores_(n, 0.0), half_life_hours_(half_life_hours) {}

void DecayScores::advance(std::chrono::seconds dt) {
    const double hours = static_cast<double>(dt.count()) / 3600.0;
    const double factor = std::exp2(-hours / half_life_hours_);
    for (auto& s : scores_) s *= factor;
}

Eigen::VectorXd model_quantities(const Eigen::MatrixXd& N, const Eigen::VectorXd& log_demand,
                                 const Eigen::VectorXd& anchor, const Eigen::VectorXd& p) {
    const Eigen::VectorXd log_ratio = (p.array() / anchor.array()).log().matrix();
    return (log_demand + N * log_ratio).array().exp().matrix();
}

namespace {

Eigen::VectorXd foc_residual(const Eigen::MatrixXd& N, const Eigen::VectorXd& costs, const Eigen::VectorXd& log_demand,
                             const Eigen::VectorXd& anchor, const Eigen::VectorXd& log_p) {
    ProfitModel model;
    model.members.resize(static_cast<std::size_t>(N.rows()));
    model.prices = log_p.array().exp().matrix();
    model.costs = costs;
    model.quantities = model_quantities(N, log_demand, anchor, model.prices);
    model.N = N;
    return normalized_gradient(model, profit_gradient(model));
}

std::optional<Eigen::VectorXd> markup_fixed_point(const Eigen::MatrixXd& N, const Eigen::VectorXd& costs,
                                                  const Eigen::VectorXd& log_demand, const Eigen::VectorXd& anchor) {
    Eigen::VectorXd log_p = anchor.array().log().matrix();
    const double damping = 0.5;
    for (int iter = 0; iter < 20000; ++iter) {
        const Eigen::VectorXd p = log_p.array().exp().matrix();
        const Eigen::VectorXd q = model_quantities(N, log_demand, anchor, p);
        const Eigen::VectorXd r = p.cwiseProduct(q);
        const Eigen::VectorXd s = r / r.sum();
        Eigen::VectorXd m;
        try {
            m = stat::solve_linear(N.transpose(), -s).x;
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        const Eigen::VectorXd lerner = m.cwiseQuotient(s);
        if (!(lerner.array() < 1.0).all() || !(lerner.array() > 0.0).all()) return std::nullopt;
        const Eigen::VectorXd target = (costs.array() / (1.0 - lerner.array())).log().matrix();
        const double change = (target - log_p).cwiseAbs().maxCoeff();
        log_p += damping * (target - log_p);
        if (!log_p.allFinite()) return std::nullopt;
        if (change < 1e-14) break;
    }
    return log_p;
}

// Damped Newton on the normalized first-order conditions in log prices, from the single-product optima.
std::optional<Eigen::VectorXd> newton_foc(const Eigen::MatrixXd& N, const Eigen::VectorXd& costs,
                                          const Eigen::VectorXd& log_demand, const Eigen::VectorXd& anchor) {
    const auto n = N.rows();
    Eigen::VectorXd log_p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = N(i, i);
        log_p(i) = eta < -1.0 ? std::log(costs(i) * eta / (1.0 + eta)) : std::log(anchor(i));
    }
    auto F = foc_residual(N, costs, log_demand, anchor, log_p);
    for (int iter = 0; iter < 200; ++iter) {
        if (!F.allFinite()) return std::nullopt;
        if (F.cwiseAbs().maxCoeff() < 1e-13) break;
        Eigen::MatrixXd J(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double h = 1e-6;
            Eigen::VectorXd up = log_p, down = log_p;
            up(j) += h;
            down(j) -= h;
            J.col(j) = (foc_residual(N, costs, log_demand, anchor, up) - foc_residual(N, costs, log_demand, anchor, down)) /
                       (2.0 * h);
        }
        Eigen::VectorXd step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;
        const double longest = step.cwiseAbs().maxCoeff();
        if (longest > 0.5) step *= 0.5 / longest;
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 30; ++k, t *= 0.5) {
            const Eigen::VectorXd trial = log_p + t * step;
            const auto Ft = foc_residual(N, costs, log_demand, anchor, trial);
            if (Ft.allFinite() && Ft.norm() < F.norm()) {
                log_p = trial;
                F = Ft;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return log_p;
}

} // namespace

std::optional<Eigen::VectorXd> solve_optimal_prices(const Eigen::MatrixXd& N, const Eigen::VectorXd& costs,
                                                    const Eigen::VectorXd& log_demand, const Eigen::VectorXd& anchor) {
    const auto n = N.rows();
    if (N.cols() != n || costs.size() != n || log_demand.size() != n || anchor.size() != n)
        throw InputError("solve_optimal_prices: dimension mismatch");
    if (!(costs.array() > 0.0).all()) return std::nullopt;

    auto accept = [&](const std::optional<Eigen::VectorXd>& log_p) -> std::optional<Eigen::VectorXd> {
        if (!log_p || !log_p->allFinite()) return std::nullopt;
        const Eigen::VectorXd p = log_p->array().exp().matrix();
        // Interior optimum: every price above cost.
        if (!(p.array() > costs.array()).all()) return std::nullopt;
        const double worst = foc_residual(N, costs, log_demand, anchor, *log_p).cwiseAbs().maxCoeff();
        if (!(worst <= 1e-9)) return std::nullopt;
        return p;
    };
    if (auto p = accept(markup_fixed_point(N, costs, log_demand, anchor))) return p;
    return accept(newton_foc(N, costs, log_demand, anchor));
}

namespace {

constexpr std::uint64_t kStreamRelease = 1, kStreamPrice = 2, kStreamMarketplace = 3, kStreamNoise = 4,
                        kStreamPurchase = 5, kStreamDrop = 6, kStreamControls = 7, kStreamRankNoise = 8,
                        kStreamStandalone = 9;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Independent generator per (seed, product, purpose).
std::mt19937_64 substream(std::uint64_t seed, std::string_view id, std::uint64_t tag) {
    const auto h = fnv1a(id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex guard;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure) failure = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Plan {
    Product product;
    ProductTruth truth;
    std::size_t group = static_cast<std::size_t>(-1);  // index into GroundTruth::groups, or none
    std::size_t member = 0;
    double avg_rating = 4.0;
    long long reviews0 = 0;
};

std::string pad(std::size_t v, int width) {
    auto s = std::to_string(v);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::string role_suffix(Relation rel, std::size_t member, std::size_t members) {
    switch (rel) {
    case Relation::versions:
        if (members == 2) return member == 0 ? "HI" : "LO";
        return member == 0 ? "HI" : member + 1 == members ? "LO" : "MID" + std::to_string(member);
    case Relation::bundle_with_components: return member == 0 ? "BUNDLE" : "C" + std::to_string(member);
    case Relation::generations: return member == 0 ? "CUR" : "PRI";
    }
    return "X";
}

ProductKind role_kind(Relation rel, std::size_t member, std::size_t members) {
    switch (rel) {
    case Relation::versions:
        return member == 0 ? ProductKind::version_high : member + 1 == members ? ProductKind::version_low
                                                                                : ProductKind::version_mid;
    case Relation::bundle_with_components: return member == 0 ? ProductKind::bundle : ProductKind::component;
    case Relation::generations: return member == 0 ? ProductKind::generation_current : ProductKind::generation_prior;
    }
    return ProductKind::standalone;
}

// Prices are quoted in cents; demand is driven by the quoted price.
double cents(double p) { return std::max(std::round(p * 100.0) / 100.0, 0.01); }

double value_or(const std::vector<double>& v, std::size_t i, double fallback) { return v.empty() ? fallback : v[i]; }

double reflect(double x, double bound) {
    if (bound <= 0.0) return 0.0;
    for (int guard = 0; guard < 64 && std::abs(x) > bound; ++guard) x = x > bound ? 2 * bound - x : -2 * bound - x;
    return std::clamp(x, -bound, bound);
}

} // namespace

SimulatedMarket generate_market(const SimConfig& config) {
    config.validate();
    const double beta = config.calibration_truth.beta;
    const auto n_slots = config.slots();
    const auto slot = config.slot_length();
    const double slot_weeks = static_cast<double>(slot.count()) / (7.0 * 86400.0);

    GroundTruth truth;
    truth.config = config;
    std::vector<Plan> plans;

    auto release_for = [&](const std::string& id) {
        auto rng = substream(config.seed, id, kStreamRelease);
        std::uniform_int_distribution<int> d(config.release_days_min, config.release_days_max);
        return std::chrono::floor<std::chrono::days>(config.start) - std::chrono::days{d(rng)};
    };

    std::map<Relation, std::size_t> counters;
    for (const auto& tmpl : config.groups) {
        for (std::size_t copy = 0; copy < tmpl.count; ++copy) {
            const char prefix = tmpl.relation == Relation::versions ? 'V' : tmpl.relation == Relation::generations ? 'N' : 'B';
            const auto gid = std::string(1, prefix) + pad(++counters[tmpl.relation], 3);
            const auto m = tmpl.members;
            GroupTruth g;
            g.group_id = gid;
            for (std::size_t i = 0; i < m; ++i) g.members.push_back(gid + "-" + role_suffix(tmpl.relation, i, m));
            g.elasticities.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
            Eigen::VectorXd costs(static_cast<Eigen::Index>(m)), log_demand(static_cast<Eigen::Index>(m)),
                anchor(static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < m; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                for (std::size_t j = 0; j < m; ++j)
                    g.elasticities(ii, static_cast<Eigen::Index>(j)) = beta * (i == j ? tmpl.phi[i] : tmpl.gamma[i * m + j]);
                costs(ii) = value_or(tmpl.cost, i, 0.0);
                log_demand(ii) = tmpl.log_demand[i];
                anchor(ii) = tmpl.anchor_price[i];
            }
            if (!tmpl.cost.empty()) {
                g.optimal_prices = solve_optimal_prices(g.elasticities, costs, log_demand, anchor);
                if (g.optimal_prices) {
                    g.optimal_quantities = model_quantities(g.elasticities, log_demand, anchor, *g.optimal_prices);
                    ProfitModel pm{g.members, *g.optimal_prices, costs, *g.optimal_quantities, g.elasticities, 1.0};
                    g.max_optimal_gradient = normalized_gradient(pm, profit_gradient(pm)).cwiseAbs().maxCoeff();
                }
            }
            if (tmpl.start_at_optimum && !g.optimal_prices)
                throw InputError("sim: group " + gid + " has no interior optimum to start from");

            const auto group_index = truth.groups.size();
            for (std::size_t i = 0; i < m; ++i) {
                Plan p;
                const auto& id = g.members[i];
                p.product = Product{id, "Synthetic " + gid + " " + role_suffix(tmpl.relation, i, m), tmpl.category,
                                    release_for(id), role_kind(tmpl.relation, i, m), gid, {}};
                if (tmpl.relation == Relation::bundle_with_components && i == 0)
                    p.product.bundle_components.assign(g.members.begin() + 1, g.members.end());
                auto& t = p.truth;
                t.product_id = id;
                t.group_id = gid;
                t.phi = tmpl.phi[i];
                for (std::size_t j = 0; j < m; ++j) {
                    t.elasticities[g.members[j]] = g.elasticities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (j != i) t.gammas[g.members[j]] = tmpl.gamma[i * m + j];
                }
                t.lambda = value_or(tmpl.lambda, i, 0.0);
                t.omega_days = value_or(tmpl.omega_days, i, 0.0);
                t.omega_reviews = value_or(tmpl.omega_reviews, i, 0.0);
                t.cost = value_or(tmpl.cost, i, 0.0);
                t.anchor_price = tmpl.anchor_price[i];
                if (g.optimal_prices) t.optimal_price = (*g.optimal_prices)(static_cast<Eigen::Index>(i));
                t.base_price = tmpl.start_at_optimum ? *t.optimal_price : t.anchor_price;
                t.log_demand = tmpl.log_demand[i];
                const double ratio = value_or(tmpl.marketplace_ratio, i, 0.8);
                if (ratio > 0.0) t.marketplace_base = ratio * t.anchor_price;
                p.group = group_index;
                p.member = i;
                plans.push_back(std::move(p));
            }
            truth.groups.push_back(std::move(g));
        }
    }

    for (std::size_t s = 0; s < config.standalone_count; ++s) {
        Plan p;
        const auto id = "S" + pad(s + 1, 4);
        auto rng = substream(config.seed, id, kStreamStandalone);
        std::uniform_real_distribution<double> level(config.standalone_log_demand_min, config.standalone_log_demand_max);
        std::uniform_real_distribution<double> lp(std::log(config.standalone_price_min), std::log(config.standalone_price_max));
        p.product = Product{id, "Synthetic standalone " + id, Category::security_utilities, release_for(id),
                            ProductKind::standalone, std::nullopt, {}};
        auto& t = p.truth;
        t.product_id = id;
        t.phi = config.standalone_phi;
        t.elasticities[id] = beta * config.standalone_phi;
        t.log_demand = level(rng);
        t.anchor_price = std::exp(lp(rng));
        t.base_price = t.anchor_price;
        t.cost = config.standalone_cost_ratio * t.anchor_price;
        const double eta = beta * config.standalone_phi;
        if (eta < -1.0) t.optimal_price = t.cost * eta / (1.0 + eta);
        plans.push_back(std::move(p));
    }

    std::sort(plans.begin(), plans.end(), [](const Plan& a, const Plan& b) { return a.product.product_id < b.product.product_id; });
    for (std::size_t i = 1; i < plans.size(); ++i)
        if (plans[i].product.product_id == plans[i - 1].product.product_id)
            throw InputError("sim: duplicate product id " + plans[i].product.product_id);
    const auto n = plans.size();
    if (n == 0) throw InputError("sim: configuration produces no products");

    std::vector<Timestamp> times(n_slots);
    for (std::size_t k = 0; k < n_slots; ++k) times[k] = config.start + static_cast<long long>(k) * slot;

    // Per-product exogenous paths.
    std::vector<std::vector<double>> log_price(n), log_market(n), days_release(n), reviews(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        auto& plan = plans[i];
        const auto& id = plan.product.product_id;
        auto walk = [&](std::uint64_t tag, double base) {
            auto rng = substream(config.seed, id, tag);
            std::bernoulli_distribution change(config.price.change_prob);
            std::normal_distribution<double> step(0.0, config.price.log_step > 0.0 ? config.price.log_step : 1.0);
            std::vector<double> path(n_slots);
            double dev = 0.0;
            for (std::size_t k = 0; k < n_slots; ++k) {
                if (k >= config.price.hold_slots && k > 0 && config.price.log_step > 0.0 && change(rng))
                    dev = reflect(dev + step(rng), config.price.max_log_dev);
                path[k] = std::log(cents(base * std::exp(dev)));
            }
            return path;
        };
        log_price[i] = walk(kStreamPrice, plan.truth.base_price);
        if (plan.truth.marketplace_base) log_market[i] = walk(kStreamMarketplace, *plan.truth.marketplace_base);

        auto rng = substream(config.seed, id, kStreamControls);
        std::uniform_int_distribution<int> stars(6, 10);
        plan.avg_rating = stars(rng) / 2.0;
        std::uniform_int_distribution<long long> initial(0, 60);
        plan.reviews0 = initial(rng);
        std::poisson_distribution<int> daily(0.5);
        long long count = plan.reviews0;
        days_release[i].resize(n_slots);
        reviews[i].resize(n_slots);
        for (std::size_t k = 0; k < n_slots; ++k) {
            if (k > 0 && k % static_cast<std::size_t>(config.slots_per_day) == 0) count += daily(rng);
            days_release[i][k] = static_cast<double>(std::max<long long>(0, days_between(plan.product.release_date, times[k])));
            reviews[i][k] = static_cast<double>(count);
        }
    });

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) index_of[plans[i].product.product_id] = i;

    // Demand: log Q = L + sum_b eta_ab (log p_b - log anchor_b) + beta*lambda (log p^ - log p^_base) + controls + noise.
    std::vector<std::vector<double>> quantity(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        const auto& plan = plans[i];
        const auto& t = plan.truth;
        auto rng = substream(config.seed, t.product_id, kStreamNoise);
        std::normal_distribution<double> noise(0.0, config.noise_sigma > 0.0 ? config.noise_sigma : 1.0);
        std::vector<std::pair<std::size_t, double>> drivers;
        for (const auto& [other, eta] : t.elasticities) drivers.emplace_back(index_of.at(other), eta);
        quantity[i].resize(n_slots);
        const double d0 = std::log(days_release[i][0] + 1.0), r0 = std::log(reviews[i][0] + 1.0);
        for (std::size_t k = 0; k < n_slots; ++k) {
            double lq = t.log_demand;
            for (const auto& [j, eta] : drivers) lq += eta * (log_price[j][k] - std::log(plans[j].truth.anchor_price));
            if (t.marketplace_base) lq += beta * t.lambda * (log_market[i][k] - std::log(*t.marketplace_base));
            lq += beta * t.omega_days * (std::log(days_release[i][k] + 1.0) - d0);
            lq += beta * t.omega_reviews * (std::log(reviews[i][k] + 1.0) - r0);
            if (config.noise_sigma > 0.0) lq += noise(rng);
            quantity[i][k] = std::exp(lq);
        }
    });

    // Purchases: Poisson counts with rate proportional to weekly demand.
    std::vector<std::vector<int>> purchases(n, std::vector<int>(n_slots, 0));
    parallel_for(n, config.threads, [&](std::size_t i) {
        auto rng = substream(config.seed, plans[i].product.product_id, kStreamPurchase);
        for (std::size_t k = 0; k < n_slots; ++k) {
            std::poisson_distribution<int> draw(quantity[i][k] * slot_weeks);
            purchases[i][k] = draw(rng);
        }
    });

    std::vector<std::string> ids;
    for (const auto& p : plans) ids.push_back(p.product.product_id);
    RankPolicyEngine engine(config.rank_policy, ids, config.calibration_truth, config.pareto_offset, config.integer_ranks);
    DecayScores decay(n, config.half_life_hours);
    std::vector<std::vector<double>> ranks(n, std::vector<double>(n_slots));
    std::vector<double> scores(n);
    for (std::size_t k = 0; k < n_slots; ++k) {
        if (config.rank_policy == RankPolicy::direct_pareto) {
            for (std::size_t i = 0; i < n; ++i) scores[i] = quantity[i][k];
        } else {
            if (k > 0) decay.advance(slot);
            for (std::size_t i = 0; i < n; ++i)
                if (purchases[i][k] > 0) decay.add(i, purchases[i][k]);
            const auto s = decay.scores();
            scores.assign(s.begin(), s.end());
        }
        const auto published = engine.apply(scores, times[k]);
        for (std::size_t i = 0; i < n; ++i) ranks[i][k] = published[i];
    }
    if (config.rank_noise_sigma > 0.0) {
        parallel_for(n, config.threads, [&](std::size_t i) {
            auto rng = substream(config.seed, ids[i], kStreamRankNoise);
            std::normal_distribution<double> noise(0.0, config.rank_noise_sigma);
            for (auto& r : ranks[i]) {
                r *= std::exp(noise(rng));
                if (config.integer_ranks) r = std::round(r);
                r = std::max(r, 1.0);
            }
        });
    }

    std::vector<std::vector<bool>> dropped(n, std::vector<bool>(n_slots, false));
    if (config.drop_rate > 0.0) {
        parallel_for(n, config.threads, [&](std::size_t i) {
            auto rng = substream(config.seed, ids[i], kStreamDrop);
            std::bernoulli_distribution drop(config.drop_rate);
            for (std::size_t k = 0; k < n_slots; ++k) dropped[i][k] = drop(rng);
        });
    }

    SimulatedMarket market;
    market.observations.reserve(n * n_slots);
    std::vector<Product> products;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& plan = plans[i];
        const double list = cents(plan.truth.base_price * std::exp(config.price.max_log_dev) * config.list_markup);
        for (std::size_t k = 0; k < n_slots; ++k) {
            PanelObservation o;
            o.product_id = ids[i];
            o.timestamp = times[k];
            o.sales_rank = ranks[i][k];
            if (dropped[i][k]) truth.drops.push_back({ids[i], times[k]});
            else o.amazon_price = std::exp(log_price[i][k]);
            o.list_price = list;
            if (plan.truth.marketplace_base) o.marketplace_new_price = std::exp(log_market[i][k]);
            o.avg_rating = plan.avg_rating;
            o.n_reviews = static_cast<long long>(reviews[i][k]);
            market.observations.push_back(std::move(o));
            if (purchases[i][k] > 0) truth.purchases.push_back({ids[i], times[k], purchases[i][k]});
        }
        products.push_back(plan.product);
        truth.products.push_back(plan.truth);
    }
    market.catalog = Catalog(std::move(products));
    market.truth = std::move(truth);
    return market;
}

std::string ground_truth_report(const GroundTruth& truth) {
    using io::Json;
    using io::number;
    const auto& c = truth.config;
    Json j;
    j["config"] = {{"seed", c.seed},
                   {"start", format_timestamp(c.start)},
                   {"slots_per_day", c.slots_per_day},
                   {"days", c.days},
                   {"rank_policy", to_string(c.rank_policy)},
                   {"half_life_hours", number(c.half_life_hours)},
                   {"pareto_offset", number(c.pareto_offset)},
                   {"integer_ranks", c.integer_ranks},
                   {"noise_sigma", number(c.noise_sigma)},
                   {"rank_noise_sigma", number(c.rank_noise_sigma)},
                   {"drop_rate", number(c.drop_rate)}};
    j["calibration"] = {{"intercept", number(c.calibration_truth.intercept)},
                        {"beta", number(c.calibration_truth.beta)},
                        {"log_base", "e"}};
    Json products = Json::array();
    for (const auto& p : truth.products) {
        Json gam = Json::object(), eta = Json::object();
        for (const auto& [k, v] : p.gammas) gam[k] = number(v);
        for (const auto& [k, v] : p.elasticities) eta[k] = number(v);
        products.push_back({{"product_id", p.product_id},
                            {"group_id", p.group_id.empty() ? Json() : Json(p.group_id)},
                            {"phi", number(p.phi)},
                            {"gammas", gam},
                            {"lambda", number(p.lambda)},
                            {"controls", {{"log_days_release", number(p.omega_days)}, {"log_n_reviews", number(p.omega_reviews)}}},
                            {"elasticities", eta},
                            {"cost", number(p.cost)},
                            {"anchor_price", number(p.anchor_price)},
                            {"base_price", number(p.base_price)},
                            {"optimal_price", number(p.optimal_price)},
                            {"log_demand", number(p.log_demand)},
                            {"marketplace_base", number(p.marketplace_base)}});
    }
    j["products"] = products;
    Json groups = Json::array();
    for (const auto& g : truth.groups) {
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < g.elasticities.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index col = 0; col < g.elasticities.cols(); ++col) row.push_back(number(g.elasticities(r, col)));
            rows.push_back(row);
        }
        Json opt = Json(), qty = Json();
        if (g.optimal_prices) {
            opt = Json::array();
            qty = Json::array();
            for (Eigen::Index r = 0; r < g.optimal_prices->size(); ++r) {
                opt.push_back(number((*g.optimal_prices)(r)));
                qty.push_back(number((*g.optimal_quantities)(r)));
            }
        }
        groups.push_back({{"group_id", g.group_id},
                          {"members", g.members},
                          {"elasticities", rows},
                          {"optimal_prices", opt},
                          {"optimal_quantities", qty},
                          {"max_optimal_gradient", number(g.max_optimal_gradient)},
                          {"first_order_conditions_hold", g.optimal_prices.has_value() && g.max_optimal_gradient <= 1e-9}});
    }
    j["groups"] = groups;
    Json purchases = Json::array();
    for (const auto& p : truth.purchases) purchases.push_back({p.product_id, format_timestamp(p.timestamp), p.units});
    j["purchases"] = purchases;
    Json drops = Json::array();
    for (const auto& d : truth.drops) drops.push_back({d.product_id, format_timestamp(d.timestamp)});
    j["drops"] = drops;
    return io::dump(j);
}

void write_market(const SimulatedMarket& market, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_observations(dir / "observations.csv", market.observations);
    write_catalog(dir / "products.csv", market.catalog);
    io::write_text(dir / "ground_truth.json", ground_truth_report(market.truth));
}

} // namespace rankdemand::sim
