#include "rankdemand/demand.hpp"

#include "rankdemand/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rankdemand {

namespace {

const ProductSeries& require_series(const PanelDataset& panel, const std::string& id) {
    const auto* s = panel.find_series(id);
    if (!s) throw InputError("no observations for product " + id);
    return *s;
}

double checked_log(double v, const std::string& what) {
    if (!(v > 0.0)) throw InputError("nonpositive " + what + " in demand design");
    return std::log(v);
}

FocalDesign design_for(const std::string& focal, std::vector<std::string> related, const PanelDataset& panel,
                       const DemandSpec& spec) {
    const auto& own = require_series(panel, focal);
    std::vector<const ProductSeries*> rel;
    for (const auto& j : related) rel.push_back(&require_series(panel, j));

    const bool marketplace =
        spec.include_marketplace && std::any_of(own.rows.begin(), own.rows.end(), [](const PanelObservation& o) {
            return o.marketplace_new_price.has_value();
        });

    struct Row {
        std::size_t own;
        std::vector<std::size_t> rel;
    };
    std::vector<Row> rows;
    for (std::size_t t = 0; t < own.rows.size(); ++t) {
        const auto& o = own.rows[t];
        if (!o.sales_rank || !o.amazon_price) continue;
        if (marketplace && !o.marketplace_new_price) continue;
        Row row{t, {}};
        bool ok = true;
        for (const auto* s : rel) {
            auto idx = s->find(o.timestamp);
            if (!idx || !s->rows[*idx].amazon_price) {
                ok = false;
                break;
            }
            row.rel.push_back(*idx);
        }
        if (ok) rows.push_back(std::move(row));
    }
    if (rows.size() < spec.min_joint_observations)
        throw InputError("insufficient aligned rows for " + focal + ": " + std::to_string(rows.size()) + " < " +
                         std::to_string(spec.min_joint_observations));

    FocalDesign d;
    d.product_id = focal;
    d.related = std::move(related);
    std::vector<std::string> controls;
    for (const auto& c : spec.controls) {
        if (c == "days_release" || c == "n_reviews") {
            controls.push_back(c);
        } else if (c == "avg_rating") {
            const bool present = std::all_of(rows.begin(), rows.end(),
                                             [&](const Row& r) { return own.rows[r.own].avg_rating.has_value(); });
            if (present) controls.push_back(c);
            else d.omitted.push_back(labels::avg_rating);
        } else {
            throw InputError("unknown control '" + c + "'");
        }
    }

    d.column_labels.push_back(labels::own_price);
    for (const auto& j : d.related) d.column_labels.push_back(std::string(labels::related_prefix) + j);
    if (marketplace) d.column_labels.push_back(labels::marketplace);
    else d.omitted.push_back(labels::marketplace);
    for (const auto& c : controls)
        d.column_labels.push_back(c == "days_release" ? labels::days_release
                                  : c == "avg_rating" ? labels::avg_rating
                                                      : labels::n_reviews);

    const auto n = static_cast<Eigen::Index>(rows.size());
    d.raw.resize(n, static_cast<Eigen::Index>(d.column_labels.size()));
    d.raw_response.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        const auto& o = own.rows[r.own];
        d.times.push_back(o.timestamp);
        d.entities.push_back(focal);
        d.raw_response(i) = checked_log(*o.sales_rank, "sales rank");
        Eigen::Index c = 0;
        d.raw(i, c++) = checked_log(*o.amazon_price, "price");
        for (std::size_t k = 0; k < rel.size(); ++k) d.raw(i, c++) = checked_log(*rel[k]->rows[r.rel[k]].amazon_price, "price");
        if (marketplace) d.raw(i, c++) = checked_log(*o.marketplace_new_price, "marketplace price");
        for (const auto& ctl : controls) {
            if (ctl == "days_release") d.raw(i, c++) = std::log(static_cast<double>(own.days_release[r.own]) + 1.0);
            else if (ctl == "avg_rating") d.raw(i, c++) = *o.avg_rating;
            else d.raw(i, c++) = std::log(static_cast<double>(o.n_reviews) + 1.0);
        }
    }
    return d;
}

std::vector<std::string> related_of(const RelationGroup& group, const std::string& focal) {
    std::vector<std::string> out;
    for (const auto& m : group.members)
        if (m != focal) out.push_back(m);
    return out;
}

// Runs the within-transformed regression on stacked designs sharing one column layout.
stat::RegressionResult fit_within(std::span<const FocalDesign> designs, const DemandSpec& spec,
                                  std::vector<std::string>& labels_out) {
    Eigen::Index n = 0;
    for (const auto& d : designs) n += d.raw.rows();
    const auto k = designs.front().raw.cols();
    labels_out = designs.front().column_labels;

    std::vector<std::string> entities;
    entities.reserve(static_cast<std::size_t>(n));
    Eigen::MatrixXd raw(n, k);
    Eigen::VectorXd y(n);
    Eigen::Index offset = 0;
    for (const auto& d : designs) {
        raw.middleRows(offset, d.raw.rows()) = d.raw;
        y.segment(offset, d.raw.rows()) = d.raw_response;
        entities.insert(entities.end(), d.entities.begin(), d.entities.end());
        offset += d.raw.rows();
    }
    Eigen::MatrixXd X(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const Eigen::VectorXd col = raw.col(c);
        X.col(c) = stat::within_transform(std::span<const double>(col.data(), static_cast<std::size_t>(n)), entities);
    }
    const Eigen::VectorXd yw = stat::within_transform(std::span<const double>(y.data(), static_cast<std::size_t>(n)), entities);

    stat::OlsOptions options;
    options.covariance = spec.covariance;
    options.absorbed_dof = static_cast<Eigen::Index>(designs.size());
    return stat::ols_fit(stat::DesignMatrix(X, labels_out), yw, options);
}

DemandEstimates to_estimates(const std::string& group_id, const FocalDesign& d, const stat::RegressionResult& fit,
                             std::span<const std::string> design_labels) {
    DemandEstimates e;
    e.group_id = group_id;
    e.product_id = d.product_id;
    e.labels = fit.labels;
    e.covariance = fit.covariance;
    e.r_squared = fit.r_squared;
    e.n_obs = static_cast<std::size_t>(d.raw.rows());
    e.dropped = fit.dropped_columns;
    e.omitted = d.omitted;

    // Layout of `d` may differ from the pooled label names only in related ids; map by position.
    double intercept = d.raw_response.mean();
    for (std::size_t c = 0; c < design_labels.size(); ++c) {
        const auto& pooled_label = design_labels[c];
        const auto& label = d.column_labels[c];
        const auto idx = fit.index_of(pooled_label);
        if (idx < 0) {
            if (label.rfind(labels::related_prefix, 0) == 0)
                e.structural_zeros.push_back(label.substr(std::string(labels::related_prefix).size()));
            continue;
        }
        const double coef = fit.coefficients(idx);
        e.std_errors[label] = std::sqrt(std::max(0.0, fit.covariance(idx, idx)));
        intercept -= coef * d.raw.col(static_cast<Eigen::Index>(c)).mean();
        if (label == labels::own_price) e.phi = coef;
        else if (label.rfind(labels::related_prefix, 0) == 0)
            e.gammas[label.substr(std::string(labels::related_prefix).size())] = coef;
        else if (label == labels::marketplace) e.lambda = coef;
        else e.controls[label] = coef;
    }
    if (!fit.has(design_labels.front()))
        throw NumericalError("own-price column for " + d.product_id + " was dropped as collinear");
    e.intercept = intercept;
    return e;
}

void check_size(const DemandEstimates& e) {
    const auto coefficients = e.labels.size() + 1;  // plus the absorbed intercept
    if (e.n_obs < coefficients + 2)
        throw InputError("too few observations for " + e.product_id + " (" + std::to_string(e.n_obs) + ")");
}

} // namespace

std::vector<FocalDesign> build_design(const RelationGroup& group, const PanelDataset& panel, const DemandSpec& spec) {
    std::vector<FocalDesign> out;
    for (const auto& focal : group.members) out.push_back(design_for(focal, related_of(group, focal), panel, spec));
    return out;
}

std::vector<DemandEstimates> estimate_demand(const RelationGroup& group, const PanelDataset& panel,
                                             const DemandSpec& spec) {
    std::vector<DemandEstimates> out;
    for (const auto& d : build_design(group, panel, spec)) {
        std::vector<std::string> fit_labels;
        const auto fit = fit_within(std::span<const FocalDesign>(&d, 1), spec, fit_labels);
        auto e = to_estimates(group.group_id, d, fit, fit_labels);
        check_size(e);
        out.push_back(std::move(e));
    }
    return out;
}

std::map<std::string, std::vector<DemandEstimates>> estimate_demand_pooled(std::span<const RelationGroup> groups,
                                                                           const PanelDataset& panel,
                                                                           const DemandSpec& spec) {
    // Pool key: relation, group size, member position.
    std::map<std::tuple<Relation, std::size_t, std::size_t>, std::vector<std::pair<const RelationGroup*, FocalDesign>>> pools;
    for (const auto& g : groups) {
        auto designs = build_design(g, panel, spec);
        for (std::size_t pos = 0; pos < designs.size(); ++pos)
            pools[{g.relation, g.members.size(), pos}].emplace_back(&g, std::move(designs[pos]));
    }

    std::map<std::string, std::vector<DemandEstimates>> out;
    for (const auto& g : groups) out[g.group_id].resize(g.members.size());

    for (auto& [key, entries] : pools) {
        // Role labels make the columns comparable across groups.
        std::vector<FocalDesign> stacked;
        std::vector<std::string> role_labels;
        for (auto& [g, d] : entries) {
            FocalDesign r = d;
            for (std::size_t c = 0; c < r.column_labels.size(); ++c)
                if (r.column_labels[c].rfind(labels::related_prefix, 0) == 0) {
                    const auto id = r.column_labels[c].substr(std::string(labels::related_prefix).size());
                    const auto pos = std::find(r.related.begin(), r.related.end(), id) - r.related.begin();
                    r.column_labels[c] = std::string(labels::related_prefix) + "#" + std::to_string(pos + 1);
                }
            if (!stacked.empty() && r.column_labels != stacked.front().column_labels)
                throw InputError("pooled designs disagree on regressors for group " + g->group_id);
            stacked.push_back(std::move(r));
        }
        const auto fit = fit_within(stacked, spec, role_labels);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& [g, d] = entries[i];
            auto e = to_estimates(g->group_id, d, fit, role_labels);
            e.n_obs = static_cast<std::size_t>(fit.n);
            // Fixed effect of this product, not the pooled mean.
            double a = d.raw_response.mean();
            for (std::size_t c = 0; c < role_labels.size(); ++c) {
                const auto idx = fit.index_of(role_labels[c]);
                if (idx >= 0) a -= fit.coefficients(idx) * d.raw.col(static_cast<Eigen::Index>(c)).mean();
            }
            e.intercept = a;
            check_size(e);
            out[g->group_id][std::get<2>(key)] = std::move(e);
        }
    }
    return out;
}

ElasticityMatrix elasticity_matrix(const std::string& group_id, std::span<const std::string> members,
                                   std::span<const DemandEstimates> estimates, double beta) {
    ElasticityMatrix m;
    m.group_id = group_id;
    m.members.assign(members.begin(), members.end());
    const auto n = static_cast<Eigen::Index>(members.size());
    m.N = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& id = members[static_cast<std::size_t>(i)];
        auto it = std::find_if(estimates.begin(), estimates.end(), [&](const DemandEstimates& e) { return e.product_id == id; });
        if (it == estimates.end()) throw InputError("no demand estimates for group member " + id);
        m.N(i, i) = own_price_elasticity(it->phi, beta);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& other = members[static_cast<std::size_t>(j)];
            auto g = it->gammas.find(other);
            if (g == it->gammas.end()) {
                m.structural_zeros.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                continue;
            }
            m.N(i, j) = cross_price_elasticity(g->second, beta);
        }
    }
    return m;
}

} // namespace rankdemand
