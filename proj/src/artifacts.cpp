#include "rankdemand/artifacts.hpp"

#include "rankdemand/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rankdemand::io {

Json number(double value) {
    if (!std::isfinite(value)) return Json();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    double rounded = std::strtod(buf, nullptr);
    if (rounded == 0.0) rounded = 0.0;  // no negative zero
    return rounded;
}

Json number(const std::optional<double>& value) { return value ? number(*value) : Json(); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json(const std::filesystem::path& path) {
    const auto name = path.filename().string();
    std::ifstream in(path);
    if (!in) throw ArtifactError(name, "missing artifact " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ArtifactError(name, "unreadable artifact " + path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("cannot write " + path.string());
        out << text;
        if (!out) throw InputError("write failed: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

Json to_json(const ValidationReport& r) {
    Json rejected = Json::array();
    for (const auto& x : r.rows_rejected) rejected.push_back({{"row", x.row}, {"reason", x.reason}});
    Json fills = Json::array();
    for (const auto& f : r.fills)
        fills.push_back({{"product_id", f.product_id}, {"timestamp", format_timestamp(f.timestamp)}, {"field", f.field}});
    return Json{{"rows_read", r.rows_read},
                {"rows_rejected", rejected},
                {"price_fills", r.price_fills},
                {"price_gaps", r.price_gaps},
                {"rank_gaps", r.rank_gaps},
                {"price_violations", r.price_violations},
                {"pre_release_observations", r.pre_release_observations},
                {"fills", fills},
                {"warnings", r.warnings}};
}

namespace {

template <typename T>
T field(const Json& j, const char* key, const std::string& artifact) {
    if (!j.is_object() || !j.contains(key)) throw ArtifactError(artifact, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ArtifactError(artifact, std::string("bad field '") + key + "'");
    }
}

double num(const Json& j, const char* key, const std::string& artifact) {
    if (!j.is_object() || !j.contains(key)) throw ArtifactError(artifact, std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_null()) return std::nan("");
    if (!v.is_number()) throw ArtifactError(artifact, std::string("field '") + key + "' is not a number");
    return v.get<double>();
}

std::optional<double> opt_num(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

Json matrix(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const Json& j, std::size_t n, const std::string& artifact) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (!j.is_array() || j.size() != n) throw ArtifactError(artifact, "bad matrix shape");
    for (std::size_t r = 0; r < n; ++r) {
        if (!j[r].is_array() || j[r].size() != n) throw ArtifactError(artifact, "bad matrix shape");
        for (std::size_t c = 0; c < n; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].is_null() ? std::nan("") : j[r][c].get<double>();
    }
    return m;
}

Json number_map(const std::map<std::string, double>& m) {
    Json o = Json::object();
    for (const auto& [k, v] : m) o[k] = number(v);
    return o;
}

std::map<std::string, double> number_map_from(const Json& j) {
    std::map<std::string, double> m;
    if (!j.is_object()) return m;
    for (const auto& [k, v] : j.items()) m[k] = v.is_null() ? std::nan("") : v.get<double>();
    return m;
}

Json flags_of(const MemberCost& m) {
    Json f = Json::array();
    if (m.negative_cost) f.push_back("negative_cost");
    if (m.negative_lerner) f.push_back("negative_lerner");
    return f;
}

} // namespace

Json to_json(const CalibrationArtifact& a) {
    const auto& c = a.calibration;
    return Json{{"intercept", number(c.intercept)},
                {"beta", number(c.beta)},
                {"se_intercept", number(c.se_intercept)},
                {"se_beta", number(c.se_beta)},
                {"n_pairs", c.n_pairs},
                {"params", {{"theta", number(a.theta)}, {"min_abs_drop", number(a.min_abs_drop)}}},
                {"events", a.events},
                {"implausible_pairs", a.implausible_pairs},
                {"log_base", "e"}};
}

CalibrationArtifact calibration_from_json(const Json& j, const std::string& artifact) {
    CalibrationArtifact a;
    a.calibration.intercept = num(j, "intercept", artifact);
    a.calibration.beta = num(j, "beta", artifact);
    a.calibration.se_intercept = j.contains("se_intercept") ? num(j, "se_intercept", artifact) : 0.0;
    a.calibration.se_beta = j.contains("se_beta") ? num(j, "se_beta", artifact) : 0.0;
    a.calibration.n_pairs = j.contains("n_pairs") ? field<int>(j, "n_pairs", artifact) : 0;
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (p.contains("theta")) a.theta = num(p, "theta", artifact);
        if (p.contains("min_abs_drop")) a.min_abs_drop = num(p, "min_abs_drop", artifact);
    }
    if (j.contains("events")) a.events = field<std::size_t>(j, "events", artifact);
    if (j.contains("implausible_pairs")) a.implausible_pairs = field<std::size_t>(j, "implausible_pairs", artifact);
    if (j.contains("log_base") && j.at("log_base") != "e")
        throw ArtifactError(artifact, "unsupported log base; expected natural log");
    if (!std::isfinite(a.calibration.beta) || !(a.calibration.beta < 0.0))
        throw ArtifactError(artifact, "calibration beta must be negative");
    if (!std::isfinite(a.calibration.intercept)) throw ArtifactError(artifact, "calibration intercept is not finite");
    return a;
}

ElasticityMatrix elasticity_of(const DemandGroup& g) {
    return elasticity_matrix(g.group_id, g.members, g.estimates, g.beta_used);
}

Json to_json(const DemandArtifact& a) {
    Json groups = Json::array();
    for (const auto& g : a.groups) {
        Json members = Json::array();
        for (const auto& e : g.estimates) {
            Json cov = matrix(e.covariance);
            members.push_back({{"product_id", e.product_id},
                               {"phi", number(e.phi)},
                               {"gammas", number_map(e.gammas)},
                               {"lambda", number(e.lambda)},
                               {"controls", number_map(e.controls)},
                               {"intercept", number(e.intercept)},
                               {"se", number_map(e.std_errors)},
                               {"labels", e.labels},
                               {"covariance", cov},
                               {"r2", number(e.r_squared)},
                               {"n_obs", e.n_obs},
                               {"dropped", e.dropped},
                               {"structural_zeros", e.structural_zeros},
                               {"omitted", e.omitted}});
        }
        const auto N = elasticity_of(g);
        Json zeros = Json::array();
        for (const auto& [r, c] : N.structural_zeros) zeros.push_back({r, c});
        groups.push_back({{"group_id", g.group_id},
                          {"relation", to_string(g.relation)},
                          {"beta_used", number(g.beta_used)},
                          {"members", members},
                          {"elasticities", matrix(N.N)},
                          {"structural_zeros", zeros}});
    }
    return Json{{"calibration", to_json(a.calibration)},
                {"pooled", a.pooled},
                {"controls", a.controls},
                {"groups", groups},
                {"failures", a.failures}};
}

DemandArtifact demand_from_json(const Json& j, const std::string& artifact) {
    DemandArtifact a;
    if (!j.is_object() || !j.contains("groups") || !j.contains("calibration"))
        throw ArtifactError(artifact, "not a demand artifact");
    a.calibration = calibration_from_json(j.at("calibration"), artifact);
    a.pooled = j.value("pooled", false);
    a.controls = j.value("controls", std::vector<std::string>{});
    a.failures = j.value("failures", std::vector<std::string>{});
    for (const auto& gj : j.at("groups")) {
        DemandGroup g;
        g.group_id = field<std::string>(gj, "group_id", artifact);
        auto rel = parse_relation(field<std::string>(gj, "relation", artifact));
        if (!rel) throw ArtifactError(artifact, "unknown relation in group " + g.group_id);
        g.relation = *rel;
        g.beta_used = num(gj, "beta_used", artifact);
        for (const auto& ej : field<Json>(gj, "members", artifact)) {
            DemandEstimates e;
            e.group_id = g.group_id;
            e.product_id = field<std::string>(ej, "product_id", artifact);
            e.phi = num(ej, "phi", artifact);
            e.gammas = number_map_from(ej.value("gammas", Json::object()));
            e.lambda = opt_num(ej, "lambda");
            e.controls = number_map_from(ej.value("controls", Json::object()));
            e.intercept = num(ej, "intercept", artifact);
            e.std_errors = number_map_from(ej.value("se", Json::object()));
            e.labels = ej.value("labels", std::vector<std::string>{});
            if (ej.contains("covariance")) e.covariance = matrix_from(ej.at("covariance"), e.labels.size(), artifact);
            e.r_squared = opt_num(ej, "r2").value_or(0.0);
            e.n_obs = ej.value("n_obs", std::size_t{0});
            e.dropped = ej.value("dropped", std::vector<std::string>{});
            e.structural_zeros = ej.value("structural_zeros", std::vector<std::string>{});
            e.omitted = ej.value("omitted", std::vector<std::string>{});
            g.members.push_back(e.product_id);
            g.estimates.push_back(std::move(e));
        }
        if (g.estimates.empty()) throw ArtifactError(artifact, "group " + g.group_id + " has no members");
        a.groups.push_back(std::move(g));
    }
    return a;
}

Json to_json(const CostArtifact& a) {
    Json groups = Json::array();
    for (const auto& g : a.groups) {
        Json members = Json::array();
        for (const auto& m : g.estimate.members)
            members.push_back({{"product_id", m.product_id},
                               {"price", number(m.price)},
                               {"quantity", number(m.quantity)},
                               {"share", number(m.share)},
                               {"m", number(m.m)},
                               {"lerner", number(m.lerner)},
                               {"marginal_cost", number(m.marginal_cost)},
                               {"flags", flags_of(m)}});
        groups.push_back({{"group_id", g.estimate.group_id},
                          {"share_method", g.share_method},
                          {"window", g.window},
                          {"window_rows", g.window_rows},
                          {"condition_estimate", number(g.estimate.condition_estimate)},
                          {"residual", number(g.estimate.residual)},
                          {"members", members}});
    }
    return Json{{"groups", groups}, {"failures", a.failures}};
}

CostArtifact costs_from_json(const Json& j, const std::string& artifact) {
    CostArtifact a;
    if (!j.is_object() || !j.contains("groups")) throw ArtifactError(artifact, "not a cost artifact");
    a.failures = j.value("failures", std::vector<std::string>{});
    for (const auto& gj : j.at("groups")) {
        CostGroup g;
        g.estimate.group_id = field<std::string>(gj, "group_id", artifact);
        g.share_method = gj.value("share_method", std::string("direct"));
        g.window = gj.value("window", std::string("all"));
        g.window_rows = gj.value("window_rows", std::size_t{0});
        g.estimate.condition_estimate = opt_num(gj, "condition_estimate").value_or(1.0);
        g.estimate.residual = opt_num(gj, "residual").value_or(0.0);
        for (const auto& mj : field<Json>(gj, "members", artifact)) {
            MemberCost m;
            m.product_id = field<std::string>(mj, "product_id", artifact);
            m.price = num(mj, "price", artifact);
            m.quantity = num(mj, "quantity", artifact);
            m.share = num(mj, "share", artifact);
            m.m = num(mj, "m", artifact);
            m.lerner = num(mj, "lerner", artifact);
            m.marginal_cost = num(mj, "marginal_cost", artifact);
            for (const auto& f : mj.value("flags", Json::array())) {
                if (f == "negative_cost") m.negative_cost = true;
                else if (f == "negative_lerner") m.negative_lerner = true;
                else throw ArtifactError(artifact, "unknown cost flag " + f.dump());
            }
            g.estimate.members.push_back(std::move(m));
        }
        a.groups.push_back(std::move(g));
    }
    return a;
}

Json to_json(const OptimalityArtifact& a) {
    Json groups = Json::array();
    for (const auto& g : a.groups) {
        Json members = Json::array();
        for (const auto& v : g.members)
            members.push_back({{"product_id", v.product_id},
                               {"gradient", number(v.gradient)},
                               {"normalized_gradient", number(v.normalized_gradient)},
                               {"classification", to_string(v.classification)}});
        groups.push_back({{"group_id", g.group_id},
                          {"tolerance", number(g.tolerance)},
                          {"k", number(g.k)},
                          {"window", g.window},
                          {"members", members}});
    }
    return Json{{"groups", groups}, {"failures", a.failures}};
}

OptimalityArtifact optimality_from_json(const Json& j, const std::string& artifact) {
    OptimalityArtifact a;
    if (!j.is_object() || !j.contains("groups")) throw ArtifactError(artifact, "not an optimality artifact");
    a.failures = j.value("failures", std::vector<std::string>{});
    for (const auto& gj : j.at("groups")) {
        OptimalityGroup g;
        g.group_id = field<std::string>(gj, "group_id", artifact);
        g.tolerance = num(gj, "tolerance", artifact);
        g.k = num(gj, "k", artifact);
        g.window = gj.value("window", std::string("all"));
        for (const auto& mj : field<Json>(gj, "members", artifact)) {
            OptimalityVerdict v;
            v.product_id = field<std::string>(mj, "product_id", artifact);
            v.gradient = num(mj, "gradient", artifact);
            v.normalized_gradient = num(mj, "normalized_gradient", artifact);
            v.tolerance = g.tolerance;
            const auto c = field<std::string>(mj, "classification", artifact);
            if (c == "optimal") v.classification = PriceVerdict::optimal;
            else if (c == "overpriced") v.classification = PriceVerdict::overpriced;
            else if (c == "underpriced") v.classification = PriceVerdict::underpriced;
            else throw ArtifactError(artifact, "unknown classification " + c);
            g.members.push_back(std::move(v));
        }
        a.groups.push_back(std::move(g));
    }
    return a;
}

} // namespace rankdemand::io
