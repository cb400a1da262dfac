#include "rankdemand/artifacts.hpp"
#include "rankdemand/errors.hpp"
#include "rankdemand/pipeline.hpp"
#include "rankdemand/report.hpp"
#include "rankdemand/simulate.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace rankdemand;
using pipeline::PipelineConfig;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::string out_dir;
    bool quiet = false;
    unsigned threads = 0;
};

// Flags shared by the analysis subcommands; empty / unset values leave the config file's settings alone.
struct StageFlags {
    std::string input, catalog, calibration_input, calibration, demand, costs, out;
    std::optional<double> theta, min_abs_drop, demand_bound, tolerance, k, slot_hours;
    std::optional<int> max_fill_gap;
    bool published = false, pooled = false, no_marketplace = false, literal = false;
    std::string controls, covariance, share_method, window, eval_window, from, to;
    std::vector<std::string> products;
};

PipelineConfig make_config(const Globals& g, const StageFlags& f) {
    PipelineConfig c = g.config.empty() ? PipelineConfig{} : pipeline::load_pipeline_config(g.config);
    if (!g.out_dir.empty()) c.out_dir = g.out_dir;
    if (g.strict) c.strict = true;
    if (g.quiet) c.quiet = true;
    if (g.threads) c.threads = g.threads;
    if (!f.input.empty()) c.observations = f.input;
    if (!f.catalog.empty()) c.catalog = f.catalog;
    if (!f.calibration_input.empty()) c.calibration_observations = f.calibration_input;
    if (f.theta) c.theta = *f.theta;
    if (f.min_abs_drop) c.min_abs_drop = *f.min_abs_drop;
    if (f.demand_bound) c.demand_bound = *f.demand_bound;
    if (f.tolerance) c.tolerance = *f.tolerance;
    if (f.k) c.k = *f.k;
    if (f.max_fill_gap) c.validation.max_fill_gap = *f.max_fill_gap;
    if (f.slot_hours) c.validation.slot_length = std::chrono::seconds{static_cast<long long>(std::llround(*f.slot_hours * 3600))};
    if (f.published) c.use_published_calibration = true;
    if (f.pooled) c.pooled = true;
    if (f.no_marketplace) c.demand.include_marketplace = false;
    if (f.literal) c.literal_rank_shares = true;
    if (!f.controls.empty()) {
        c.demand.controls.clear();
        if (f.controls != "none") {
            std::istringstream s(f.controls);
            std::string item;
            while (std::getline(s, item, ',')) c.demand.controls.push_back(item);
        }
    }
    if (f.covariance == "hc1") c.demand.covariance = stat::CovarianceKind::hc1;
    else if (f.covariance == "hc0") c.demand.covariance = stat::CovarianceKind::hc0;
    else if (!f.covariance.empty()) throw InputError("--covariance must be hc0 or hc1");
    if (!f.share_method.empty()) {
        auto m = pipeline::parse_share_method(f.share_method);
        if (!m) throw InputError("--share-method must be direct or rank_ratio");
        c.share_method = *m;
    }
    if (!f.window.empty()) c.window = pipeline::Window::parse(f.window);
    if (!f.eval_window.empty()) c.eval_window = pipeline::Window::parse(f.eval_window);
    if (!f.products.empty()) c.plot_products = f.products;
    c.validate();
    return c;
}

fs::path output_path(const PipelineConfig& c, const std::string& given, const char* name) {
    return given.empty() ? c.out_dir / name : fs::path(given);
}

fs::path input_path(const PipelineConfig& c, const std::string& given, const char* name) {
    return given.empty() ? c.out_dir / name : fs::path(given);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sales-rank demand reconstruction, elasticity, cost and price-optimality toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    StageFlags f;
    app.add_option("--config", g.config, "key-value configuration file");
    app.add_option("--seed", g.seed, "simulator seed");
    app.add_flag("--strict", g.strict, "treat row-level and group-level problems as fatal");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_flag("--quiet", g.quiet, "suppress progress output");
    app.add_option("--threads", g.threads, "worker threads for per-product or per-group work");

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic market with ground truth");

    auto* validate = app.add_subcommand("validate", "check observations against the catalog");
    for (auto* sc : {validate}) {
        sc->add_option("--input", f.input, "observations.csv");
        sc->add_option("--catalog", f.catalog, "products.csv");
        sc->add_option("--max-fill-gap", f.max_fill_gap, "longest price gap (slots) forward-filled");
        sc->add_option("--slot-hours", f.slot_hours, "observation cadence in hours");
        sc->add_option("--out", f.out, "validation report path");
    }

    auto* calibrate = app.add_subcommand("calibrate", "fit the rank-to-demand mapping from spike events");
    calibrate->add_option("--input", f.calibration_input, "observations.csv with hourly ranks");
    calibrate->add_option("--theta", f.theta, "minimum relative rank improvement");
    calibrate->add_option("--min-abs-drop", f.min_abs_drop, "minimum rank improvement in positions");
    calibrate->add_option("--demand-bound", f.demand_bound, "weekly demand plausibility bound");
    calibrate->add_flag("--published", f.published, "write the published calibration instead of fitting");
    calibrate->add_option("--out", f.out, "calibration.json path");

    auto* demand = app.add_subcommand("demand", "estimate demand and elasticities per group");
    demand->add_option("--input", f.input, "observations.csv");
    demand->add_option("--catalog", f.catalog, "products.csv");
    demand->add_option("--calibration", f.calibration, "calibration.json");
    demand->add_option("--controls", f.controls, "comma list of days_release,avg_rating,n_reviews or none");
    demand->add_flag("--pooled", f.pooled, "share coefficients across groups of the same shape");
    demand->add_flag("--no-marketplace", f.no_marketplace, "leave out the marketplace price");
    demand->add_option("--covariance", f.covariance, "hc0 or hc1");
    demand->add_option("--max-fill-gap", f.max_fill_gap, "longest price gap (slots) forward-filled");
    demand->add_option("--slot-hours", f.slot_hours, "observation cadence in hours");
    demand->add_option("--out", f.out, "demand_estimates.json path");

    auto* costs = app.add_subcommand("costs", "recover markups and marginal costs");
    costs->add_option("--demand", f.demand, "demand_estimates.json");
    costs->add_option("--input", f.input, "observations.csv");
    costs->add_option("--catalog", f.catalog, "products.csv");
    costs->add_option("--share-method", f.share_method, "direct or rank_ratio");
    costs->add_flag("--literal-shares", f.literal, "two-product share formula exactly as printed");
    costs->add_option("--window", f.window, "all | first:N | last:N | range:A:B");
    costs->add_option("--max-fill-gap", f.max_fill_gap, "longest price gap (slots) forward-filled");
    costs->add_option("--slot-hours", f.slot_hours, "observation cadence in hours");
    costs->add_option("--out", f.out, "costs.json path");

    auto* optimality = app.add_subcommand("optimality", "test prices against first-order conditions");
    optimality->add_option("--demand", f.demand, "demand_estimates.json");
    optimality->add_option("--costs", f.costs, "costs.json");
    optimality->add_option("--input", f.input, "observations.csv (needed with --eval-window)");
    optimality->add_option("--catalog", f.catalog, "products.csv (needed with --eval-window)");
    optimality->add_option("--tolerance", f.tolerance, "normalized-gradient tolerance");
    optimality->add_option("--k", f.k, "quantity scale constant");
    optimality->add_option("--eval-window", f.eval_window, "window for prices and quantities; default: cost window");
    optimality->add_option("--max-fill-gap", f.max_fill_gap, "longest price gap (slots) forward-filled");
    optimality->add_option("--slot-hours", f.slot_hours, "observation cadence in hours");
    optimality->add_option("--out", f.out, "optimality.json path");

    auto* run = app.add_subcommand("pipeline", "run calibrate, demand, costs, optimality and report");
    run->add_option("--input", f.input, "observations.csv");
    run->add_option("--catalog", f.catalog, "products.csv");
    run->add_option("--calibration-input", f.calibration_input, "observations used for calibration");
    run->add_option("--from", f.from, "first stage to run; earlier artifacts are read from the output directory");
    run->add_option("--to", f.to, "last stage to run");
    run->add_option("--share-method", f.share_method, "direct or rank_ratio");
    run->add_option("--window", f.window, "cost window");
    run->add_option("--eval-window", f.eval_window, "optimality window");
    run->add_option("--tolerance", f.tolerance, "normalized-gradient tolerance");
    run->add_flag("--published", f.published, "use the published calibration");
    run->add_flag("--pooled", f.pooled, "pooled demand estimation");

    auto* report = app.add_subcommand("report", "render text, JSON and plot series from artifacts");
    report->add_option("--input", f.input, "observations.csv for plot series");
    report->add_option("--catalog", f.catalog, "products.csv");
    report->add_option("--product", f.products, "products to plot (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (g.config.empty()) throw InputError("simulate needs --config <sim config>");
            auto config = sim::load_sim_config(g.config);
            if (g.seed) config.seed = *g.seed;
            if (g.threads) config.threads = g.threads;
            const fs::path dir = g.out_dir.empty() ? fs::path("sim") : fs::path(g.out_dir);
            const auto market = sim::generate_market(config);
            sim::write_market(market, dir);
            if (!g.quiet)
                std::cerr << "simulate: " << market.observations.size() << " observations, " << market.catalog.size()
                          << " products -> " << dir.string() << "\n";
            return 0;
        }

        const auto config = make_config(g, f);
        std::ostream* log = config.quiet ? nullptr : &std::cerr;

        if (validate->parsed()) {
            const auto panel = pipeline::load_panel(config);
            const auto path = output_path(config, f.out, "validation.json");
            io::write_text(path, io::dump(io::to_json(panel.report())));
            if (log) *log << "validate: " << panel.report().rows_read << " rows, " << panel.report().rows_rejected.size()
                          << " rejected -> " << path.string() << "\n";
        } else if (calibrate->parsed()) {
            auto c = config;
            if (c.calibration_observations.empty() && c.observations.empty() && !c.use_published_calibration)
                throw InputError("calibrate needs --input");
            const auto a = pipeline::run_calibrate(c);
            const auto path = output_path(c, f.out, "calibration.json");
            io::write_text(path, io::dump(io::to_json(a)));
            if (log) *log << "calibrate: beta " << a.calibration.beta << " from " << a.calibration.n_pairs << " pairs -> "
                          << path.string() << "\n";
        } else if (demand->parsed()) {
            const auto cal_path = input_path(config, f.calibration, "calibration.json");
            const auto cal = io::calibration_from_json(io::read_json(cal_path), cal_path.filename().string());
            const auto panel = pipeline::load_panel(config);
            const auto a = pipeline::run_demand(config, cal, panel);
            const auto path = output_path(config, f.out, "demand_estimates.json");
            io::write_text(path, io::dump(io::to_json(a)));
            if (log) *log << "demand: " << a.groups.size() << " groups, " << a.failures.size() << " failed -> " << path.string() << "\n";
        } else if (costs->parsed()) {
            const auto dem_path = input_path(config, f.demand, "demand_estimates.json");
            const auto dem = io::demand_from_json(io::read_json(dem_path), dem_path.filename().string());
            const auto panel = pipeline::load_panel(config);
            const auto a = pipeline::run_costs(config, dem, panel);
            const auto path = output_path(config, f.out, "costs.json");
            io::write_text(path, io::dump(io::to_json(a)));
            if (log) *log << "costs: " << a.groups.size() << " groups -> " << path.string() << "\n";
        } else if (optimality->parsed()) {
            const auto dem_path = input_path(config, f.demand, "demand_estimates.json");
            const auto cost_path = input_path(config, f.costs, "costs.json");
            const auto dem = io::demand_from_json(io::read_json(dem_path), dem_path.filename().string());
            const auto cst = io::costs_from_json(io::read_json(cost_path), cost_path.filename().string());
            std::optional<PanelDataset> panel;
            if (config.eval_window) panel = pipeline::load_panel(config);
            else panel = PanelDataset(Catalog{}, {}, {}, {});
            const auto a = pipeline::run_optimality(config, dem, cst, *panel);
            const auto path = output_path(config, f.out, "optimality.json");
            io::write_text(path, io::dump(io::to_json(a)));
            if (log) {
                for (const auto& grp : a.groups)
                    for (const auto& v : grp.members)
                        *log << grp.group_id << " " << v.product_id << " " << to_string(v.classification) << "\n";
            }
        } else if (run->parsed()) {
            pipeline::Stage from = pipeline::Stage::validate, to = pipeline::Stage::report;
            if (!f.from.empty()) {
                auto s = pipeline::parse_stage(f.from);
                if (!s) throw InputError("unknown stage '" + f.from + "'");
                from = *s;
            }
            if (!f.to.empty()) {
                auto s = pipeline::parse_stage(f.to);
                if (!s) throw InputError("unknown stage '" + f.to + "'");
                to = *s;
            }
            pipeline::run_pipeline(config, from, to, log);
        } else if (report->parsed()) {
            pipeline::run_pipeline(config, pipeline::Stage::report, pipeline::Stage::report, log);
            if (!config.quiet) std::cout << report::render(report::load_bundle(config.out_dir)).text;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pipeline::exit_code_for(e);
    }
}
