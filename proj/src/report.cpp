#include "rankdemand/report.hpp"

#include "rankdemand/errors.hpp"
#include "rankdemand/statcore.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rankdemand::report {

Bundle load_bundle(const std::filesystem::path& dir) {
    Bundle b;
    auto present = [&](const char* name) { return std::filesystem::exists(dir / name); };
    if (present("validation.json")) b.validation = io::read_json(dir / "validation.json");
    if (present("calibration.json"))
        b.calibration = io::calibration_from_json(io::read_json(dir / "calibration.json"), "calibration.json");
    if (present("demand_estimates.json"))
        b.demand = io::demand_from_json(io::read_json(dir / "demand_estimates.json"), "demand_estimates.json");
    if (present("costs.json")) b.costs = io::costs_from_json(io::read_json(dir / "costs.json"), "costs.json");
    if (present("optimality.json"))
        b.optimality = io::optimality_from_json(io::read_json(dir / "optimality.json"), "optimality.json");
    return b;
}

namespace {

std::string fixed(double v, int decimals) {
    if (!std::isfinite(v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // "-0.00"
    return s;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string coefficient_cell(const DemandEstimates& e, const std::string& label, double value) {
    auto it = e.std_errors.find(label);
    if (it == e.std_errors.end()) return fixed(value, 2);
    return format_estimate(value, it->second);
}

io::Json estimate_json(double value, const DemandEstimates& e, const std::string& label) {
    io::Json j{{"estimate", io::number(value)}};
    auto it = e.std_errors.find(label);
    if (it != e.std_errors.end()) {
        j["std_error"] = io::number(it->second);
        j["stars"] = stat::significance_stars(value, it->second);
        j["cell"] = format_estimate(value, it->second);
    }
    return j;
}

void absent(std::ostringstream& out, io::Json& json, const char* key) {
    out << "(absent)\n\n";
    json[key] = {{"status", "absent"}};
}

} // namespace

std::string format_estimate(double estimate, double std_error, int decimals) {
    if (!(std::abs(std_error) > 0.0)) return fixed(estimate, decimals) + " (n/a)";
    return fixed(estimate, decimals) + stat::significance_stars(estimate, std_error) + " (" +
           fixed(std::abs(std_error), decimals) + ")";
}

Rendered render(const Bundle& b) {
    std::ostringstream out;
    io::Json json;

    out << "== Validation ==\n";
    if (b.validation) {
        const auto& v = *b.validation;
        out << "rows read: " << v.value("rows_read", 0) << ", rejected: " << v.value("rows_rejected", io::Json::array()).size()
            << ", price fills: " << v.value("price_fills", 0) << ", price gaps: " << v.value("price_gaps", 0)
            << ", rank gaps: " << v.value("rank_gaps", 0) << ", price above list: " << v.value("price_violations", 0)
            << "\n\n";
        json["validation"] = {{"status", "present"}, {"summary", v}};
    } else {
        absent(out, json, "validation");
    }

    out << "== Rank calibration ==\n";
    if (b.calibration) {
        const auto& c = b.calibration->calibration;
        const auto review = review_checkpoints(c);
        if (c.n_pairs == 0) out << "published values, not fitted\n";
        out << "log(Q + 1) = " << fixed(c.intercept, 4) << " + (" << fixed(c.beta, 4) << ") log(rank)\n"
            << "intercept " << format_estimate(c.intercept, c.se_intercept, 4) << ", beta "
            << format_estimate(c.beta, c.se_beta, 4) << ", pairs " << c.n_pairs << ", events " << b.calibration->events
            << ", implausible pairs excluded " << b.calibration->implausible_pairs << "\n"
            << "checkpoint slope " << fixed(review.checkpoint_slope, 4) << "\n"
            << "note: " << review.note << "\n\n";
        io::Json implied = io::Json::array();
        for (double q : review.implied_units) implied.push_back(io::number(q));
        json["calibration"] = {{"status", "present"},
                               {"calibration", io::to_json(*b.calibration)},
                               {"checkpoint_review",
                                {{"checkpoint_slope", io::number(review.checkpoint_slope)},
                                 {"checkpoint_intercept", io::number(review.checkpoint_intercept)},
                                 {"implied_units", implied},
                                 {"note", review.note}}}};
    } else {
        absent(out, json, "calibration");
    }

    out << "== Demand estimates (log sales rank on log prices; estimate (standard error)) ==\n";
    if (b.demand) {
        out << "*** p<0.01, ** p<0.05, * p<0.10 (normal approximation)\n";
        io::Json groups = io::Json::array();
        for (const auto& g : b.demand->groups) {
            out << "group " << g.group_id << " (" << to_string(g.relation) << "), beta used " << fixed(g.beta_used, 4) << "\n";
            io::Json members = io::Json::array();
            for (const auto& e : g.estimates) {
                out << "  " << pad_right(e.product_id, 14) << " own price " << coefficient_cell(e, labels::own_price, e.phi);
                io::Json m{{"product_id", e.product_id}, {"own_price", estimate_json(e.phi, e, labels::own_price)}};
                io::Json related = io::Json::object();
                for (const auto& [id, v] : e.gammas) {
                    const auto label = std::string(labels::related_prefix) + id;
                    out << ", price of " << id << " " << coefficient_cell(e, label, v);
                    related[id] = estimate_json(v, e, label);
                }
                for (const auto& id : e.structural_zeros) {
                    out << ", price of " << id << " 0 (no variation)";
                    related[id] = {{"estimate", 0.0}, {"structural_zero", true}};
                }
                m["related_prices"] = related;
                if (e.lambda) {
                    out << ", marketplace price " << coefficient_cell(e, labels::marketplace, *e.lambda);
                    m["marketplace_price"] = estimate_json(*e.lambda, e, labels::marketplace);
                }
                io::Json controls = io::Json::object();
                for (const auto& [label, v] : e.controls) {
                    out << ", " << label << " " << coefficient_cell(e, label, v);
                    controls[label] = estimate_json(v, e, label);
                }
                m["controls"] = controls;
                m["r_squared"] = io::number(e.r_squared);
                m["n_obs"] = e.n_obs;
                out << "; R2 " << fixed(e.r_squared, 3) << ", n " << e.n_obs << "\n";
                members.push_back(m);
            }
            const auto N = io::elasticity_of(g);
            out << "  elasticities (row: demand of, column: price of)\n";
            io::Json rows = io::Json::array();
            for (Eigen::Index r = 0; r < N.N.rows(); ++r) {
                out << "    " << pad_right(g.members[static_cast<std::size_t>(r)], 14);
                io::Json row = io::Json::array();
                for (Eigen::Index c = 0; c < N.N.cols(); ++c) {
                    out << " " << pad_right(fixed(N.N(r, c), 3), 9);
                    row.push_back(io::number(N.N(r, c)));
                }
                out << "\n";
                rows.push_back(row);
            }
            groups.push_back({{"group_id", g.group_id}, {"relation", to_string(g.relation)}, {"members", members}, {"elasticities", rows}});
        }
        for (const auto& f : b.demand->failures) out << "failed: " << f << "\n";
        out << "\n";
        json["demand"] = {{"status", "present"}, {"groups", groups}, {"failures", b.demand->failures}};
    } else {
        absent(out, json, "demand");
    }

    out << "== Marginal costs ==\n";
    if (b.costs) {
        io::Json groups = io::Json::array();
        for (const auto& g : b.costs->groups) {
            out << "group " << g.estimate.group_id << " (shares: " << g.share_method << ", window " << g.window << ", "
                << g.window_rows << " rows, condition " << fixed(g.estimate.condition_estimate, 2) << ")\n";
            io::Json members = io::Json::array();
            for (const auto& m : g.estimate.members) {
                std::string flags;
                if (m.negative_cost) flags += " [negative cost]";
                if (m.negative_lerner) flags += " [negative markup]";
                out << "  " << pad_right(m.product_id, 14) << " price " << pad_right(fixed(m.price, 2), 9) << " share "
                    << pad_right(fixed(m.share, 4), 7) << " lerner " << pad_right(fixed(m.lerner, 4), 8) << " cost "
                    << fixed(m.marginal_cost, 2) << flags << "\n";
                members.push_back({{"product_id", m.product_id},
                                   {"price", io::number(m.price)},
                                   {"share", io::number(m.share)},
                                   {"lerner", io::number(m.lerner)},
                                   {"marginal_cost", io::number(m.marginal_cost)},
                                   {"negative_cost", m.negative_cost},
                                   {"negative_lerner", m.negative_lerner}});
            }
            groups.push_back({{"group_id", g.estimate.group_id}, {"members", members}});
        }
        for (const auto& f : b.costs->failures) out << "failed: " << f << "\n";
        out << "\n";
        json["costs"] = {{"status", "present"}, {"groups", groups}, {"failures", b.costs->failures}};
    } else {
        absent(out, json, "costs");
    }

    out << "== Price optimality ==\n";
    if (b.optimality) {
        out << "gradient magnitudes are only meaningful up to the scale constant k; verdicts use the normalized gradient\n";
        io::Json groups = io::Json::array();
        std::map<std::string, int> tally;
        for (const auto& g : b.optimality->groups) {
            out << "group " << g.group_id << " (tolerance " << fixed(g.tolerance, 4) << ", k " << fixed(g.k, 4)
                << ", window " << g.window << ")\n";
            io::Json members = io::Json::array();
            for (const auto& v : g.members) {
                out << "  " << pad_right(v.product_id, 14) << " gradient " << pad_right(fixed(v.gradient, 4), 12)
                    << " normalized " << pad_right(fixed(v.normalized_gradient, 4), 9) << " " << to_string(v.classification)
                    << "\n";
                ++tally[std::string(to_string(v.classification))];
                members.push_back({{"product_id", v.product_id},
                                   {"normalized_gradient", io::number(v.normalized_gradient)},
                                   {"classification", to_string(v.classification)}});
            }
            groups.push_back({{"group_id", g.group_id}, {"members", members}});
        }
        for (const auto& f : b.optimality->failures) out << "failed: " << f << "\n";
        out << "\n";
        io::Json counts = io::Json::object();
        for (const auto& [k, v] : tally) counts[k] = v;
        json["optimality"] = {{"status", "present"}, {"groups", groups}, {"verdict_counts", counts}, {"failures", b.optimality->failures}};
    } else {
        absent(out, json, "optimality");
    }
    return {out.str(), json};
}

std::vector<std::size_t> write_plot_series(std::span<const PanelObservation> observations,
                                           std::span<const std::string> products, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::size_t> counts;
    for (const auto& id : products) {
        std::ostringstream rank_time, price_rank;
        rank_time << "timestamp,sales_rank\n";
        price_rank << "sales_rank,amazon_price\n";
        std::size_t n = 0;
        for (const auto& o : observations) {
            if (o.product_id != id) continue;
            ++n;
            const auto rank = o.sales_rank ? format_number(*o.sales_rank) : std::string();
            rank_time << format_timestamp(o.timestamp) << "," << rank << "\n";
            price_rank << rank << "," << (o.amazon_price ? format_number(*o.amazon_price) : std::string()) << "\n";
        }
        io::write_text(dir / (id + "_rank_time.csv"), rank_time.str());
        io::write_text(dir / (id + "_price_rank.csv"), price_rank.str());
        counts.push_back(n);
    }
    return counts;
}

} // namespace rankdemand::report
