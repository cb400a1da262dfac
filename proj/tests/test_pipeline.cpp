#include <doctest.h>

#include "helpers.hpp"

#include "rankdemand/artifacts.hpp"
#include "rankdemand/errors.hpp"
#include "rankdemand/optimal.hpp"
#include "rankdemand/pipeline.hpp"
#include "rankdemand/report.hpp"
#include "rankdemand/simulate.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

using namespace rankdemand;
namespace fs = std::filesystem;
using testing_support::read_file;
using testing_support::run_command;
using testing_support::write_file;

namespace {

const fs::path kSource = RANKDEMAND_SOURCE_DIR;
const std::string kCli = RANKDEMAND_CLI;

std::string cli(const std::string& args) { return "\"" + kCli + "\" --quiet " + args + " > /dev/null 2>&1"; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

pipeline::PipelineConfig sample_config(const fs::path& out) {
    auto c = pipeline::load_pipeline_config(kSource / "data/sample/pipeline.ini");
    c.out_dir = out;
    c.quiet = true;
    return c;
}

// Two-member groups held at their optimum for the first 150 slots, then free to wander.
sim::SimConfig held_config(std::uint64_t seed) {
    sim::SimConfig c;
    c.seed = seed;
    c.slots_per_day = 3;
    c.days = 200;
    c.pareto_offset = 0.0;
    c.integer_ranks = false;
    c.noise_sigma = 0.0;
    c.price.change_prob = 0.3;
    c.price.log_step = 0.2;
    c.price.max_log_dev = 0.5;
    c.price.hold_slots = 150;
    sim::GroupTemplate v;
    v.relation = Relation::versions;
    v.members = 2;
    v.count = 2;
    v.phi = {2.6, 3.0};
    v.gamma = {0.0, -0.25, -0.2, 0.0};
    v.marketplace_ratio = {0.0, 0.0};
    v.cost = {40.0, 25.0};
    v.anchor_price = {350.0, 120.0};
    v.log_demand = {3.0, 3.5};
    v.start_at_optimum = true;
    sim::GroupTemplate g = v;
    g.relation = Relation::generations;
    g.count = 1;
    g.phi = {2.2, 3.2};
    g.gamma = {0.0, -0.15, -0.3, 0.0};
    g.cost = {50.0, 20.0};
    g.anchor_price = {200.0, 90.0};
    g.log_demand = {3.2, 2.6};
    c.groups = {v, g};
    return c;
}

} // namespace

TEST_CASE("window parsing and bounds") {
    using pipeline::Window;
    CHECK(Window::parse("all").bounds(10) == std::pair<std::size_t, std::size_t>{0, 10});
    CHECK(Window::parse("first:3").bounds(10) == std::pair<std::size_t, std::size_t>{0, 3});
    CHECK(Window::parse("last:4").bounds(10) == std::pair<std::size_t, std::size_t>{6, 10});
    CHECK(Window::parse("range:2:5").bounds(10) == std::pair<std::size_t, std::size_t>{2, 5});
    CHECK(Window::parse("first:30").bounds(10) == std::pair<std::size_t, std::size_t>{0, 10});
    CHECK(Window::parse("range:2:5").str() == "range:2:5");
    CHECK_THROWS_AS(Window::parse("first:0"), InputError);
    CHECK_THROWS_AS(Window::parse("middle:4"), InputError);
    CHECK_THROWS_AS(Window::parse("range:5:2"), InputError);
    CHECK_THROWS_AS(Window::parse("range:20:30").bounds(10), InputError);
}

TEST_CASE("exit codes follow the error type") {
    CHECK(pipeline::exit_code_for(InputError("x")) == pipeline::kExitInput);
    CHECK(pipeline::exit_code_for(NumericalError("x")) == pipeline::kExitNumerical);
    CHECK(pipeline::exit_code_for(ArtifactError("costs.json", "x")) == pipeline::kExitArtifact);
    CHECK(pipeline::exit_code_for(std::runtime_error("x")) == pipeline::kExitInput);
}

TEST_CASE("pipeline config keys and errors") {
    std::istringstream in("observations = a.csv\ncatalog = b.csv\nwindow = last:10\nshare_method = rank_ratio\n"
                          "tolerance = 0.02\ncontrols = n_reviews\n");
    const auto c = pipeline::parse_pipeline_config(in, "/data");
    CHECK(c.observations == fs::path("/data/a.csv"));
    CHECK(c.window == pipeline::Window::parse("last:10"));
    CHECK(c.share_method == pipeline::ShareMethod::rank_ratio);
    CHECK(c.tolerance == 0.02);
    CHECK(c.demand.controls == std::vector<std::string>{"n_reviews"});
    std::istringstream bad("observations = a.csv\nbogus = 1\n");
    CHECK_THROWS_AS(pipeline::parse_pipeline_config(bad), InputError);
    std::istringstream tol("observations = a.csv\ncatalog = b.csv\ntolerance = -1\n");
    CHECK_THROWS_AS(pipeline::parse_pipeline_config(tol), InputError);
}

TEST_CASE("committed sample regenerates byte for byte") {
    const auto dir = testing_support::scratch_dir("regen");
    for (const char* name : {"panel", "calibration"}) {
        const auto out = dir / name;
        const auto ini = kSource / "data/sample" / (std::string(name) + "_sim.ini");
        REQUIRE(run_command(cli("--config " + quoted(ini) + " simulate --out-dir " + quoted(out))) == 0);
        for (const char* f : {"observations.csv", "products.csv", "ground_truth.json"})
            CHECK(read_file(out / f) == read_file(kSource / "data/sample" / name / f));
    }
}

TEST_CASE("command-line run over the sample writes every artifact") {
    const auto out = testing_support::scratch_dir("cli_smoke");
    const auto ini = kSource / "data/sample/pipeline.ini";
    REQUIRE(run_command(cli("--config " + quoted(ini) + " --out-dir " + quoted(out) + " pipeline")) == 0);
    const pipeline::ArtifactPaths paths(out);
    for (const auto& p : {paths.validation, paths.calibration, paths.demand, paths.costs, paths.optimality,
                          paths.report_text, paths.report_json})
        CHECK(fs::exists(p));
    const auto report = nlohmann::json::parse(read_file(paths.report_json));
    CHECK(report.contains("calibration"));
    CHECK(read_file(paths.report_text).find("== Price optimality ==") != std::string::npos);
    CHECK_FALSE(fs::is_empty(paths.plots));
}

TEST_CASE("a corrupted artifact stops the next stage with the artifact error status") {
    const auto out = testing_support::scratch_dir("cli_corrupt");
    const auto ini = kSource / "data/sample/pipeline.ini";
    const auto base = cli("--config " + quoted(ini) + " --out-dir " + quoted(out) + " pipeline");
    REQUIRE(run_command(base) == 0);
    write_file(out / "calibration.json", "{\"intercept\": ");
    const auto cmd = "\"" + kCli + "\" --config " + quoted(ini) + " --out-dir " + quoted(out) +
                     " pipeline --from demand 2> " + quoted(out / "stderr.txt");
    CHECK(run_command(cmd) == pipeline::kExitArtifact);
    CHECK(read_file(out / "stderr.txt").find("calibration.json") != std::string::npos);

    fs::remove(out / "costs.json");
    CHECK(run_command(cli("--config " + quoted(ini) + " --out-dir " + quoted(out) + " pipeline --from optimality")) ==
          pipeline::kExitArtifact);
}

TEST_CASE("missing inputs and bad flags are input errors") {
    const auto out = testing_support::scratch_dir("cli_errors");
    CHECK(run_command(cli("validate --input " + quoted(out / "nope.csv") + " --catalog " + quoted(out / "nope2.csv"))) ==
          pipeline::kExitInput);
    CHECK(run_command(cli("--config " + quoted(kSource / "data/sample/pipeline.ini") + " --out-dir " + quoted(out) +
                          " pipeline --window sideways")) == pipeline::kExitInput);
}

TEST_CASE("resuming from a later stage matches a single run") {
    const auto one = testing_support::scratch_dir("resume_one");
    const auto two = testing_support::scratch_dir("resume_two");
    pipeline::run_pipeline(sample_config(one));
    auto cfg = sample_config(two);
    pipeline::run_pipeline(cfg, pipeline::Stage::validate, pipeline::Stage::demand);
    CHECK_FALSE(fs::exists(two / "costs.json"));
    pipeline::run_pipeline(cfg, pipeline::Stage::costs, pipeline::Stage::report);
    for (const char* f : {"validation.json", "calibration.json", "demand_estimates.json", "costs.json", "optimality.json",
                          "report.txt", "report.json"})
        CHECK(read_file(one / f) == read_file(two / f));
}

TEST_CASE("thread count does not change artifacts") {
    const auto one = testing_support::scratch_dir("threads_one");
    const auto four = testing_support::scratch_dir("threads_four");
    auto a = sample_config(one);
    a.threads = 1;
    auto b = sample_config(four);
    b.threads = 4;
    pipeline::run_pipeline(a);
    pipeline::run_pipeline(b);
    for (const char* f : {"demand_estimates.json", "costs.json", "optimality.json", "report.txt"})
        CHECK(read_file(one / f) == read_file(four / f));
}

TEST_CASE("report over an empty directory marks every section absent") {
    const auto out = testing_support::scratch_dir("report_empty");
    const auto rendered = report::render(report::load_bundle(out));
    const auto& json = rendered.json;
    for (const char* k : {"calibration", "demand", "costs", "optimality"})
        CHECK(json.at(k).at("status") == "absent");
    CHECK(rendered.text.find("(absent)") != std::string::npos);
}

TEST_CASE("plot series carry one row per observation") {
    const auto out = testing_support::scratch_dir("plots");
    const auto cfg = sample_config(out);
    const auto load = load_observations(cfg.observations);
    const std::vector<std::string> ids{"V001-HI", "N001-PRI"};
    const auto counts = report::write_plot_series(load.observations, ids, out);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::size_t expected = 0;
        for (const auto& o : load.observations)
            if (o.product_id == ids[i]) ++expected;
        CHECK(counts[i] == expected);
        const auto text = read_file(out / (ids[i] + "_rank_time.csv"));
        CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == expected + 1);
        const auto pr = read_file(out / (ids[i] + "_price_rank.csv"));
        CHECK(pr.rfind("sales_rank,amazon_price\n", 0) == 0);
    }
}

TEST_CASE("noiseless market: recovered elasticities, costs and verdicts match the truth") {
    const auto dir = testing_support::scratch_dir("e2e_exact");
    const auto market = sim::generate_market(held_config(31));
    sim::write_market(market, dir / "market");

    pipeline::PipelineConfig cfg;
    cfg.observations = dir / "market/observations.csv";
    cfg.catalog = dir / "market/products.csv";
    cfg.out_dir = dir / "out";
    cfg.use_published_calibration = true;
    cfg.share_method = pipeline::ShareMethod::rank_ratio;
    cfg.window = pipeline::Window::parse("first:150");
    cfg.eval_window = pipeline::Window::parse("last:300");
    cfg.quiet = true;
    pipeline::run_pipeline(cfg);

    const auto demand = io::demand_from_json(io::read_json(cfg.out_dir / "demand_estimates.json"), "demand_estimates.json");
    const auto costs = io::costs_from_json(io::read_json(cfg.out_dir / "costs.json"), "costs.json");
    const auto opt = io::optimality_from_json(io::read_json(cfg.out_dir / "optimality.json"), "optimality.json");
    REQUIRE(demand.groups.size() == 3);
    REQUIRE(costs.groups.size() == 3);
    REQUIRE(opt.groups.size() == 3);

    const auto panel = validate_panel(market.observations, market.catalog);
    std::size_t verdicts = 0, off_optimal = 0;
    for (std::size_t g = 0; g < demand.groups.size(); ++g) {
        const auto& dg = demand.groups[g];
        const auto* truth = market.truth.find_group(dg.group_id);
        REQUIRE(truth != nullptr);
        const auto N = io::elasticity_of(dg);
        CHECK((N.N - truth->elasticities).cwiseAbs().maxCoeff() <= 1e-8);

        for (const auto& m : costs.groups[g].estimate.members) {
            const auto* t = market.truth.find(m.product_id);
            // Held prices are the optimum rounded to cents.
            CHECK(m.marginal_cost == doctest::Approx(t->cost).epsilon(1e-3));
        }

        // Truth side: true N and costs at window-average prices and true demand.
        const auto n = static_cast<Eigen::Index>(truth->members.size());
        ProfitModel model;
        model.members = truth->members;
        model.prices = Eigen::VectorXd::Zero(n);
        model.quantities = Eigen::VectorXd::Zero(n);
        model.costs.resize(n);
        model.N = truth->elasticities;
        Eigen::VectorXd L(n), anchor(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto* t = market.truth.find(truth->members[static_cast<std::size_t>(i)]);
            model.costs(i) = t->cost;
            L(i) = t->log_demand;
            anchor(i) = t->anchor_price;
        }
        const auto& lead = panel.find_series(truth->members[0])->rows;
        const std::size_t begin = lead.size() - 300;
        for (std::size_t r = begin; r < lead.size(); ++r) {
            Eigen::VectorXd p(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto* s = panel.find_series(truth->members[static_cast<std::size_t>(i)]);
                p(i) = *s->rows[*s->find(lead[r].timestamp)].amazon_price;
            }
            model.prices += p / 300.0;
            model.quantities += sim::model_quantities(truth->elasticities, L, anchor, p) / 300.0;
        }
        const auto expected = classify(model, profit_gradient(model));
        const auto& got = opt.groups[g].members;
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].normalized_gradient == doctest::Approx(expected[i].normalized_gradient).epsilon(2e-4).scale(1.0));
            if (std::abs(std::abs(expected[i].normalized_gradient) - 0.01) > 1e-3) {
                CHECK(got[i].classification == expected[i].classification);
                ++verdicts;
            }
            if (expected[i].classification != PriceVerdict::optimal) ++off_optimal;
        }
    }
    CHECK(verdicts >= 5);
    CHECK(off_optimal > 0);
}
