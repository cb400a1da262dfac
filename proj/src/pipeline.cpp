#include "rankdemand/pipeline.hpp"

#include "rankdemand/errors.hpp"
#include "rankdemand/optimal.hpp"
#include "rankdemand/report.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace rankdemand::pipeline {

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::validate: return "validate";
    case Stage::calibrate: return "calibrate";
    case Stage::demand: return "demand";
    case Stage::costs: return "costs";
    case Stage::optimality: return "optimality";
    case Stage::report: return "report";
    }
    return "unknown";
}

std::optional<Stage> parse_stage(std::string_view t) {
    for (auto s : {Stage::validate, Stage::calibrate, Stage::demand, Stage::costs, Stage::optimality, Stage::report})
        if (to_string(s) == t) return s;
    return std::nullopt;
}

std::string_view to_string(ShareMethod m) { return m == ShareMethod::direct ? "direct" : "rank_ratio"; }

std::optional<ShareMethod> parse_share_method(std::string_view t) {
    if (t == "direct") return ShareMethod::direct;
    if (t == "rank_ratio") return ShareMethod::rank_ratio;
    return std::nullopt;
}

namespace {

std::size_t parse_count(std::string_view text, std::string_view whole) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw InputError("bad window '" + std::string(whole) + "'");
    return v;
}

} // namespace

Window Window::parse(std::string_view text) {
    Window w;
    if (text == "all") return w;
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw InputError("bad window '" + std::string(text) + "'");
    const auto kind = text.substr(0, colon);
    const auto rest = text.substr(colon + 1);
    if (kind == "first" || kind == "last") {
        w.kind = kind == "first" ? Kind::first : Kind::last;
        w.a = parse_count(rest, text);
        if (w.a == 0) throw InputError("window '" + std::string(text) + "' selects no rows");
    } else if (kind == "range") {
        auto c2 = rest.find(':');
        if (c2 == std::string_view::npos) throw InputError("bad window '" + std::string(text) + "'");
        w.kind = Kind::range;
        w.a = parse_count(rest.substr(0, c2), text);
        w.b = parse_count(rest.substr(c2 + 1), text);
        if (w.b <= w.a) throw InputError("window '" + std::string(text) + "' selects no rows");
    } else {
        throw InputError("bad window '" + std::string(text) + "'");
    }
    return w;
}

std::string Window::str() const {
    switch (kind) {
    case Kind::all: return "all";
    case Kind::first: return "first:" + std::to_string(a);
    case Kind::last: return "last:" + std::to_string(a);
    case Kind::range: return "range:" + std::to_string(a) + ":" + std::to_string(b);
    }
    return "all";
}

std::pair<std::size_t, std::size_t> Window::bounds(std::size_t n) const {
    std::pair<std::size_t, std::size_t> r{0, n};
    switch (kind) {
    case Kind::all: break;
    case Kind::first: r = {0, std::min(a, n)}; break;
    case Kind::last: r = {n - std::min(a, n), n}; break;
    case Kind::range:
        if (b > n) throw InputError("window " + str() + " exceeds " + std::to_string(n) + " aligned rows");
        r = {a, b};
        break;
    }
    if (r.first >= r.second) throw InputError("window " + str() + " selects no rows");
    return r;
}

void PipelineConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw InputError("theta must be in (0, 1)");
    if (min_abs_drop < 0.0) throw InputError("min_abs_drop must be >= 0");
    if (!(demand_bound > 0.0)) throw InputError("demand_bound must be positive");
    if (!(tolerance > 0.0)) throw InputError("tolerance must be positive");
    if (!(k > 0.0)) throw InputError("k must be positive");
    if (validation.max_fill_gap < 0) throw InputError("max_fill_gap must be >= 0");
    if (validation.slot_length.count() <= 0) throw InputError("slot length must be positive");
    if (literal_rank_shares && share_method != ShareMethod::rank_ratio)
        throw InputError("literal rank shares need share_method rank_ratio");
    for (const auto& c : demand.controls)
        if (c != "days_release" && c != "avg_rating" && c != "n_reviews") throw InputError("unknown control '" + c + "'");
}

PipelineConfig parse_pipeline_config(std::istream& in, const std::filesystem::path& base) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    PipelineConfig c;
    auto path = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base.empty() ? base / p : p;
    };
    auto number = [](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw InputError("config: bad number for " + key + ": " + v);
        }
    };
    auto boolean = [](const std::string& key, const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw InputError("config: bad boolean for " + key + ": " + v);
    };
    auto list = [](const std::string& v) {
        std::vector<std::string> out;
        std::istringstream s(v);
        std::string item;
        while (std::getline(s, item, ',')) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    };
    for (const auto& [key, node] : pt) {
        if (!node.empty()) throw InputError("config: sections are not supported ([" + key + "])");
        const auto v = node.get_value<std::string>();
        if (key == "observations") c.observations = path(v);
        else if (key == "catalog") c.catalog = path(v);
        else if (key == "calibration_observations") c.calibration_observations = path(v);
        else if (key == "out_dir") c.out_dir = path(v);
        else if (key == "strict") c.strict = boolean(key, v);
        else if (key == "max_fill_gap") c.validation.max_fill_gap = static_cast<int>(number(key, v));
        else if (key == "slot_hours") c.validation.slot_length = std::chrono::seconds{static_cast<long long>(std::llround(number(key, v) * 3600))};
        else if (key == "theta") c.theta = number(key, v);
        else if (key == "min_abs_drop") c.min_abs_drop = number(key, v);
        else if (key == "demand_bound") c.demand_bound = number(key, v);
        else if (key == "use_published_calibration") c.use_published_calibration = boolean(key, v);
        else if (key == "controls") c.demand.controls = list(v);
        else if (key == "include_marketplace") c.demand.include_marketplace = boolean(key, v);
        else if (key == "min_joint_observations") c.demand.min_joint_observations = static_cast<std::size_t>(number(key, v));
        else if (key == "covariance") {
            if (v == "hc0") c.demand.covariance = stat::CovarianceKind::hc0;
            else if (v == "hc1") c.demand.covariance = stat::CovarianceKind::hc1;
            else throw InputError("config: covariance must be hc0 or hc1");
        } else if (key == "pooled") c.pooled = boolean(key, v);
        else if (key == "share_method") {
            auto m = parse_share_method(v);
            if (!m) throw InputError("config: share_method must be direct or rank_ratio");
            c.share_method = *m;
        } else if (key == "literal_rank_shares") c.literal_rank_shares = boolean(key, v);
        else if (key == "window") c.window = Window::parse(v);
        else if (key == "eval_window") c.eval_window = Window::parse(v);
        else if (key == "tolerance") c.tolerance = number(key, v);
        else if (key == "k") c.k = number(key, v);
        else if (key == "threads") c.threads = static_cast<unsigned>(number(key, v));
        else if (key == "quiet") c.quiet = boolean(key, v);
        else if (key == "plot_products") c.plot_products = list(v);
        else throw InputError("config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    return parse_pipeline_config(in, path.parent_path());
}

ArtifactPaths::ArtifactPaths(const std::filesystem::path& d)
    : validation(d / "validation.json"), calibration(d / "calibration.json"), demand(d / "demand_estimates.json"),
      costs(d / "costs.json"), optimality(d / "optimality.json"), report_text(d / "report.txt"),
      report_json(d / "report.json"), plots(d / "plots") {}

PanelDataset load_panel(const PipelineConfig& config) {
    if (config.observations.empty()) throw InputError("no observations file given");
    if (config.catalog.empty()) throw InputError("no catalog file given");
    auto load = load_observations(config.observations, config.strict);
    auto catalog = load_catalog(config.catalog);
    return validate_panel(load, catalog, config.validation);
}

namespace {

template <typename Fn>
void for_each_group(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) fn(i);
        });
    for (auto& t : pool) t.join();
}

// Per-group outcome; exceptions are captured so the stage can decide what is fatal.
template <typename T>
struct Outcome {
    std::optional<T> value;
    std::exception_ptr error;
    std::string message;
};

template <typename T>
void settle(std::vector<Outcome<T>>& outcomes, std::span<const std::string> ids, bool strict,
            std::vector<T>& values, std::vector<std::string>& failures) {
    std::exception_ptr first;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].value) {
            values.push_back(std::move(*outcomes[i].value));
        } else {
            failures.push_back(ids[i] + ": " + outcomes[i].message);
            if (!first) first = outcomes[i].error;
        }
    }
    if (first && (strict || values.empty())) std::rethrow_exception(first);
}

template <typename T, typename Fn>
Outcome<T> attempt(Fn&& fn) {
    Outcome<T> o;
    try {
        o.value = fn();
    } catch (const std::exception& e) {
        o.error = std::current_exception();
        o.message = e.what();
    }
    return o;
}

} // namespace

io::CalibrationArtifact run_calibrate(const PipelineConfig& config) {
    io::CalibrationArtifact a;
    a.theta = config.theta;
    a.min_abs_drop = config.min_abs_drop;
    if (config.use_published_calibration) {
        a.calibration = ParetoCalibration{kPublishedIntercept, kPublishedBeta, 0.0, 0.0, 0};
        return a;
    }
    const auto& path = config.calibration_observations.empty() ? config.observations : config.calibration_observations;
    if (path.empty()) throw InputError("no calibration observations given");
    const auto load = load_observations(path, config.strict);
    SpikeParams params;
    params.theta = config.theta;
    params.min_abs_drop = config.min_abs_drop;
    std::vector<DemandRankPair> pairs;
    for (const auto& series : rank_series_from(load.observations)) {
        const auto events = detect_purchases(series, params);
        a.events += events.size();
        for (auto& p : weekly_aggregate(events, series, config.demand_bound)) {
            if (p.implausible) ++a.implausible_pairs;
            else pairs.push_back(p);
        }
    }
    a.calibration = fit_pareto(pairs);
    return a;
}

io::DemandArtifact run_demand(const PipelineConfig& config, const io::CalibrationArtifact& calibration,
                              const PanelDataset& panel) {
    io::DemandArtifact a;
    a.calibration = calibration;
    a.pooled = config.pooled;
    a.controls = config.demand.controls;
    const auto& groups = panel.groups();
    if (groups.empty()) throw InputError("catalog defines no related-product groups");
    std::vector<std::string> ids;
    for (const auto& g : groups) ids.push_back(g.group_id);
    const double beta = calibration.calibration.beta;

    auto make = [&](const RelationGroup& g, std::vector<DemandEstimates> est) {
        io::DemandGroup dg;
        dg.group_id = g.group_id;
        dg.relation = g.relation;
        dg.members = g.members;
        dg.estimates = std::move(est);
        dg.beta_used = beta;
        return dg;
    };

    std::vector<Outcome<io::DemandGroup>> outcomes(groups.size());
    if (config.pooled) {
        const auto pooled = estimate_demand_pooled(groups, panel, config.demand);
        for (std::size_t i = 0; i < groups.size(); ++i) {
            auto it = pooled.find(groups[i].group_id);
            if (it == pooled.end()) {
                outcomes[i].error = std::make_exception_ptr(InputError("group missing from pooled fit"));
                outcomes[i].message = "group missing from pooled fit";
            } else {
                outcomes[i].value = make(groups[i], it->second);
            }
        }
    } else {
        for_each_group(groups.size(), config.threads, [&](std::size_t i) {
            outcomes[i] = attempt<io::DemandGroup>(
                [&] { return make(groups[i], estimate_demand(groups[i], panel, config.demand)); });
        });
    }
    settle(outcomes, ids, config.strict, a.groups, a.failures);
    return a;
}

GroupWindow group_window(std::span<const std::string> members, const PanelDataset& panel, const Window& window,
                         const ParetoCalibration& calibration, ShareMethod method, bool literal_rank_shares) {
    std::vector<const ProductSeries*> series;
    for (const auto& id : members) {
        const auto* s = panel.find_series(id);
        if (!s) throw InputError("no observations for " + id);
        series.push_back(s);
    }
    // Timestamps where every member has rank and price.
    std::vector<std::vector<std::size_t>> rows(members.size());
    for (std::size_t r = 0; r < series[0]->rows.size(); ++r) {
        const auto& lead = series[0]->rows[r];
        if (!lead.sales_rank || !lead.amazon_price) continue;
        std::vector<std::size_t> at{r};
        bool ok = true;
        for (std::size_t m = 1; m < members.size() && ok; ++m) {
            auto idx = series[m]->find(lead.timestamp);
            ok = idx && series[m]->rows[*idx].sales_rank && series[m]->rows[*idx].amazon_price;
            if (ok) at.push_back(*idx);
        }
        if (!ok) continue;
        for (std::size_t m = 0; m < members.size(); ++m) rows[m].push_back(at[m]);
    }
    GroupWindow w;
    w.aligned_rows = rows[0].size();
    if (w.aligned_rows == 0) throw InputError("no timestamps where every member has rank and price");
    const auto [begin, end] = window.bounds(w.aligned_rows);
    w.rows = end - begin;
    const double beta = calibration.beta;
    std::vector<double> effective_rank(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
        double price = 0.0, q = 0.0, power = 0.0;
        for (std::size_t r = begin; r < end; ++r) {
            const auto& o = series[m]->rows[rows[m][r]];
            price += *o.amazon_price;
            q += rank_to_quantity(*o.sales_rank, calibration);
            power += std::pow(*o.sales_rank, beta);
        }
        const double n = static_cast<double>(w.rows);
        w.prices.push_back(price / n);
        if (method == ShareMethod::direct) {
            w.quantities.push_back(q / n);
        } else {
            // Rank whose power-law quantity equals the window-average power-law quantity.
            effective_rank[m] = std::pow(power / n, 1.0 / beta);
            w.quantities.push_back(std::exp(calibration.intercept) * (power / n));
        }
    }
    if (method == ShareMethod::direct) {
        w.shares = revenue_shares(w.prices, w.quantities);
    } else {
        w.shares = shares_from_ranks(w.prices, effective_rank, beta,
                                     literal_rank_shares ? RankShareForm::literal : RankShareForm::consistent);
    }
    return w;
}

io::CostArtifact run_costs(const PipelineConfig& config, const io::DemandArtifact& demand, const PanelDataset& panel) {
    io::CostArtifact a;
    std::vector<std::string> ids;
    for (const auto& g : demand.groups) ids.push_back(g.group_id);
    std::vector<Outcome<io::CostGroup>> outcomes(demand.groups.size());
    for_each_group(demand.groups.size(), config.threads, [&](std::size_t i) {
        outcomes[i] = attempt<io::CostGroup>([&] {
            const auto& g = demand.groups[i];
            const auto N = io::elasticity_of(g);
            const auto w = group_window(g.members, panel, config.window, demand.calibration.calibration,
                                        config.share_method, config.literal_rank_shares);
            const auto sol = solve_markups(w.shares, N.N);
            io::CostGroup cg;
            cg.estimate = marginal_costs(g.members, sol.m, w.shares, w.prices);
            cg.estimate.group_id = g.group_id;
            cg.estimate.condition_estimate = sol.condition;
            cg.estimate.residual = sol.residual;
            for (std::size_t m = 0; m < g.members.size(); ++m) cg.estimate.members[m].quantity = w.quantities[m];
            cg.share_method = config.literal_rank_shares ? "rank_ratio_literal" : std::string(to_string(config.share_method));
            cg.window = config.window.str();
            cg.window_rows = w.rows;
            return cg;
        });
    });
    settle(outcomes, ids, config.strict, a.groups, a.failures);
    for (const auto& f : demand.failures) a.failures.push_back(f + " (demand stage)");
    return a;
}

io::OptimalityArtifact run_optimality(const PipelineConfig& config, const io::DemandArtifact& demand,
                                      const io::CostArtifact& costs, const PanelDataset& panel) {
    io::OptimalityArtifact a;
    std::vector<std::string> ids;
    for (const auto& g : costs.groups) ids.push_back(g.estimate.group_id);
    std::vector<Outcome<io::OptimalityGroup>> outcomes(costs.groups.size());
    for_each_group(costs.groups.size(), config.threads, [&](std::size_t i) {
        outcomes[i] = attempt<io::OptimalityGroup>([&] {
            const auto& cg = costs.groups[i];
            const io::DemandGroup* dg = nullptr;
            for (const auto& g : demand.groups)
                if (g.group_id == cg.estimate.group_id) dg = &g;
            if (!dg) throw ArtifactError("demand_estimates.json", "no estimates for group " + cg.estimate.group_id);
            const auto n = static_cast<Eigen::Index>(cg.estimate.members.size());
            ProfitModel model;
            model.members = dg->members;
            model.N = io::elasticity_of(*dg).N;
            model.k = config.k;
            model.prices.resize(n);
            model.costs.resize(n);
            model.quantities.resize(n);
            std::string window = cg.window;
            std::optional<GroupWindow> w;
            if (config.eval_window) {
                const auto method = cg.share_method == "direct" ? ShareMethod::direct : ShareMethod::rank_ratio;
                w = group_window(dg->members, panel, *config.eval_window, demand.calibration.calibration, method);
                window = config.eval_window->str();
            }
            for (Eigen::Index m = 0; m < n; ++m) {
                const auto& mc = cg.estimate.members[static_cast<std::size_t>(m)];
                if (mc.product_id != dg->members[static_cast<std::size_t>(m)])
                    throw ArtifactError("costs.json", "member order differs from demand estimates in " + cg.estimate.group_id);
                model.costs(m) = mc.marginal_cost;
                model.prices(m) = w ? w->prices[static_cast<std::size_t>(m)] : mc.price;
                model.quantities(m) = w ? w->quantities[static_cast<std::size_t>(m)] : mc.quantity;
            }
            model.validate();
            io::OptimalityGroup og;
            og.group_id = cg.estimate.group_id;
            og.members = classify(model, profit_gradient(model), config.tolerance);
            og.tolerance = config.tolerance;
            og.k = config.k;
            og.window = window;
            return og;
        });
    });
    settle(outcomes, ids, config.strict, a.groups, a.failures);
    for (const auto& f : costs.failures) a.failures.push_back(f);
    return a;
}

namespace {

template <typename Fn>
void stage(Stage s, std::ostream* log, Fn&& fn) {
    try {
        fn();
    } catch (const IllConditionedError& e) {
        throw IllConditionedError(std::string(to_string(s)) + " stage: " + e.what(), e.condition());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(to_string(s)) + " stage: " + e.what());
    } catch (const ArtifactError& e) {
        std::string what = e.what();
        const auto prefix = e.artifact() + ": ";
        if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
        throw ArtifactError(e.artifact(), std::string(to_string(s)) + " stage: " + what);
    } catch (const InputError& e) {
        throw InputError(std::string(to_string(s)) + " stage: " + e.what());
    }
    if (log) *log << to_string(s) << ": ok\n";
}

} // namespace

void run_pipeline(const PipelineConfig& config, Stage from, Stage to, std::ostream* log) {
    config.validate();
    const ArtifactPaths paths(config.out_dir);
    std::filesystem::create_directories(config.out_dir);
    auto wants = [&](Stage s) { return static_cast<int>(s) >= static_cast<int>(from) && static_cast<int>(s) <= static_cast<int>(to); };

    std::optional<PanelDataset> panel;
    auto get_panel = [&]() -> const PanelDataset& {
        if (!panel) panel = load_panel(config);
        return *panel;
    };

    if (wants(Stage::validate))
        stage(Stage::validate, log, [&] { io::write_text(paths.validation, io::dump(io::to_json(get_panel().report()))); });

    std::optional<io::CalibrationArtifact> cal;
    if (wants(Stage::calibrate)) {
        stage(Stage::calibrate, log, [&] {
            const auto j = io::to_json(run_calibrate(config));
            io::write_text(paths.calibration, io::dump(j));
            // Later stages see exactly what a resumed run would read back.
            cal = io::calibration_from_json(j, "calibration.json");
        });
    } else if (wants(Stage::demand)) {
        stage(Stage::demand, nullptr, [&] { cal = io::calibration_from_json(io::read_json(paths.calibration), "calibration.json"); });
    }

    std::optional<io::DemandArtifact> dem;
    if (wants(Stage::demand)) {
        stage(Stage::demand, log, [&] {
            const auto j = io::to_json(run_demand(config, *cal, get_panel()));
            io::write_text(paths.demand, io::dump(j));
            dem = io::demand_from_json(j, "demand_estimates.json");
        });
    } else if (wants(Stage::costs) || wants(Stage::optimality)) {
        stage(from, nullptr, [&] { dem = io::demand_from_json(io::read_json(paths.demand), "demand_estimates.json"); });
    }

    std::optional<io::CostArtifact> cst;
    if (wants(Stage::costs)) {
        stage(Stage::costs, log, [&] {
            const auto j = io::to_json(run_costs(config, *dem, get_panel()));
            io::write_text(paths.costs, io::dump(j));
            cst = io::costs_from_json(j, "costs.json");
        });
    } else if (wants(Stage::optimality)) {
        stage(from, nullptr, [&] { cst = io::costs_from_json(io::read_json(paths.costs), "costs.json"); });
    }

    if (wants(Stage::optimality)) {
        stage(Stage::optimality, log, [&] {
            auto opt = run_optimality(config, *dem, *cst, get_panel());
            io::write_text(paths.optimality, io::dump(io::to_json(opt)));
        });
    }

    if (wants(Stage::report)) {
        stage(Stage::report, log, [&] {
            const auto bundle = report::load_bundle(config.out_dir);
            const auto rendered = report::render(bundle);
            io::write_text(paths.report_text, rendered.text);
            io::write_text(paths.report_json, io::dump(rendered.json));
            if (!config.observations.empty() && std::filesystem::exists(config.observations)) {
                const auto load = load_observations(config.observations, false);
                std::vector<std::string> products = config.plot_products;
                if (products.empty() && !config.catalog.empty() && std::filesystem::exists(config.catalog)) {
                    for (const auto& g : build_relation_groups(load_catalog(config.catalog)))
                        products.insert(products.end(), g.members.begin(), g.members.end());
                    std::sort(products.begin(), products.end());
                    products.erase(std::unique(products.begin(), products.end()), products.end());
                }
                report::write_plot_series(load.observations, products, paths.plots);
            }
        });
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArtifactError*>(&e)) return kExitArtifact;
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    if (dynamic_cast<const InputError*>(&e)) return kExitInput;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitInput;
    return kExitInput;
}

} // namespace rankdemand::pipeline
