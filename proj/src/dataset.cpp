#include "rankdemand/dataset.hpp"

#include "rankdemand/errors.hpp"

#include <boost/tokenizer.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rankdemand {

namespace {

constexpr std::array kCategoryNames{"business_productivity", "security_utilities", "graphics_development",
                                    "operating_systems"};
constexpr std::array kKindNames{"standalone", "version_high", "version_low",       "version_mid",
                                "bundle",     "component",    "generation_current", "generation_prior"};
constexpr std::array kRelationNames{"versions", "bundle_with_components", "generations"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<const char*, N>& names, std::string_view token) {
    for (std::size_t i = 0; i < N; ++i)
        if (token == names[i]) return static_cast<Enum>(i);
    return std::nullopt;
}

std::vector<std::string> split_csv(const std::string& line) {
    using Sep = boost::escaped_list_separator<char>;
    boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
    std::vector<std::string> out(tok.begin(), tok.end());
    if (line.empty()) out.emplace_back();
    return out;
}

std::string quote_csv(std::string_view field) {
    if (field.find_first_of(",\"\\") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::optional<double> to_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> to_integer(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// Parses one observation row; returns the rejection reason on failure.
std::optional<std::string> parse_row(const std::vector<std::string>& f, PanelObservation& obs) {
    if (f.size() != 8) return "expected 8 fields, found " + std::to_string(f.size());
    if (f[0].empty()) return "empty product_id";
    obs.product_id = f[0];
    auto ts = parse_timestamp(f[1]);
    if (!ts) return "unparseable timestamp";
    obs.timestamp = *ts;

    if (!f[2].empty()) {
        auto rank = to_double(f[2]);
        if (!rank) return "unparseable sales_rank";
        if (*rank < 1.0) return "rank < 1";
        obs.sales_rank = *rank;
    }
    auto price = [&](const std::string& field, const char* name, std::optional<double>& out) -> std::optional<std::string> {
        if (field.empty()) return std::nullopt;
        auto v = to_double(field);
        if (!v) return std::string("unparseable ") + name;
        if (*v <= 0.0) return std::string("nonpositive ") + name;
        out = *v;
        return std::nullopt;
    };
    if (auto err = price(f[3], "amazon_price", obs.amazon_price)) return err;
    std::optional<double> list;
    if (f[4].empty()) return "missing list_price";
    if (auto err = price(f[4], "list_price", list)) return err;
    obs.list_price = *list;
    if (auto err = price(f[5], "marketplace_new_price", obs.marketplace_new_price)) return err;
    if (!f[6].empty()) {
        auto r = to_double(f[6]);
        if (!r) return "unparseable avg_rating";
        if (*r < 1.0 || *r > 5.0) return "avg_rating outside [1,5]";
        obs.avg_rating = *r;
    }
    auto reviews = to_integer(f[7]);
    if (!reviews) return "unparseable n_reviews";
    if (*reviews < 0) return "negative n_reviews";
    obs.n_reviews = *reviews;
    return std::nullopt;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return in;
}

} // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(ProductKind k) { return kKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }
std::optional<Category> parse_category(std::string_view t) { return lookup<Category>(kCategoryNames, t); }
std::optional<ProductKind> parse_kind(std::string_view t) { return lookup<ProductKind>(kKindNames, t); }
std::optional<Relation> parse_relation(std::string_view t) { return lookup<Relation>(kRelationNames, t); }

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

ObservationLoad parse_observations(std::istream& in, bool strict) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kObservationHeader)
        throw InputError("malformed observations header; expected: " + std::string(kObservationHeader));
    ObservationLoad load;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        ++load.rows_read;
        PanelObservation obs;
        std::optional<std::string> reason;
        try {
            reason = parse_row(split_csv(line), obs);
        } catch (const boost::escaped_list_error& e) {
            reason = std::string("malformed CSV: ") + e.what();
        }
        if (reason) {
            if (strict) throw InputError("row " + std::to_string(line_no) + ": " + *reason);
            load.rejected.push_back({line_no, *reason});
        } else {
            load.observations.push_back(std::move(obs));
        }
    }
    return load;
}

ObservationLoad load_observations(const std::filesystem::path& path, bool strict) {
    auto in = open_input(path);
    return parse_observations(in, strict);
}

void write_observations(std::ostream& out, std::span<const PanelObservation> rows) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    out << kObservationHeader << '\n';
    for (const auto& r : rows) {
        out << quote_csv(r.product_id) << ',' << format_timestamp(r.timestamp) << ',' << opt(r.sales_rank) << ','
            << opt(r.amazon_price) << ',' << format_number(r.list_price) << ',' << opt(r.marketplace_new_price) << ','
            << opt(r.avg_rating) << ',' << r.n_reviews << '\n';
    }
}

void write_observations(const std::filesystem::path& path, std::span<const PanelObservation> rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_observations(out, rows);
}

Catalog::Catalog(std::vector<Product> products) {
    for (auto& p : products) {
        if (p.product_id.empty()) throw InputError("catalog: empty product_id");
        const bool is_bundle = p.kind == ProductKind::bundle;
        if (is_bundle && p.bundle_components.empty())
            throw InputError("catalog: bundle " + p.product_id + " has no components");
        if (!is_bundle && !p.bundle_components.empty())
            throw InputError("catalog: non-bundle " + p.product_id + " lists bundle components");
        if (p.kind != ProductKind::standalone && (!p.group_id || p.group_id->empty()))
            throw InputError("catalog: " + p.product_id + " has kind " + std::string(to_string(p.kind)) +
                             " but no group_id");
        auto id = p.product_id;
        if (!products_.emplace(id, std::move(p)).second) throw InputError("catalog: duplicate product_id " + id);
    }
}

const Product* Catalog::find(std::string_view id) const {
    auto it = products_.find(id);
    return it == products_.end() ? nullptr : &it->second;
}

const Product& Catalog::at(std::string_view id) const {
    if (auto* p = find(id)) return *p;
    throw InputError("catalog: unknown product " + std::string(id));
}

Catalog parse_catalog(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kCatalogHeader)
        throw InputError("malformed products header; expected: " + std::string(kCatalogHeader));
    std::vector<Product> products;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto where = "products row " + std::to_string(line_no) + ": ";
        std::vector<std::string> f;
        try {
            f = split_csv(line);
        } catch (const boost::escaped_list_error& e) {
            throw InputError(where + "malformed CSV: " + e.what());
        }
        if (f.size() != 7) throw InputError(where + "expected 7 fields");
        Product p;
        p.product_id = f[0];
        p.title = f[1];
        auto cat = parse_category(f[2]);
        if (!cat) throw InputError(where + "unknown category '" + f[2] + "'");
        p.category = *cat;
        auto date = parse_date(f[3]);
        if (!date) throw InputError(where + "unparseable release_date '" + f[3] + "'");
        p.release_date = *date;
        auto kind = parse_kind(f[4]);
        if (!kind) throw InputError(where + "unknown kind '" + f[4] + "'");
        p.kind = *kind;
        if (!f[5].empty()) p.group_id = f[5];
        if (!f[6].empty()) {
            std::istringstream parts(f[6]);
            std::string part;
            while (std::getline(parts, part, ';'))
                if (!part.empty()) p.bundle_components.push_back(part);
        }
        products.push_back(std::move(p));
    }
    return Catalog(std::move(products));
}

Catalog load_catalog(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_catalog(in);
}

void write_catalog(std::ostream& out, const Catalog& catalog) {
    out << kCatalogHeader << '\n';
    for (const auto& [id, p] : catalog.products()) {
        std::string components;
        for (const auto& c : p.bundle_components) components += (components.empty() ? "" : ";") + c;
        out << quote_csv(id) << ',' << quote_csv(p.title) << ',' << to_string(p.category) << ','
            << format_date(p.release_date) << ',' << to_string(p.kind) << ',' << quote_csv(p.group_id.value_or(""))
            << ',' << quote_csv(components) << '\n';
    }
}

void write_catalog(const std::filesystem::path& path, const Catalog& catalog) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_catalog(out, catalog);
}

namespace {

int version_order(ProductKind k) {
    switch (k) {
    case ProductKind::version_high: return 0;
    case ProductKind::version_mid: return 1;
    case ProductKind::version_low: return 2;
    case ProductKind::generation_current: return 0;
    case ProductKind::generation_prior: return 1;
    default: return 3;
    }
}

} // namespace

std::vector<RelationGroup> build_relation_groups(const Catalog& catalog, std::vector<std::string>* warnings) {
    std::map<std::string, std::vector<const Product*>> versions, generations;
    std::vector<RelationGroup> groups;

    for (const auto& [id, p] : catalog.products()) {
        switch (p.kind) {
        case ProductKind::version_high:
        case ProductKind::version_mid:
        case ProductKind::version_low: versions[*p.group_id].push_back(&p); break;
        case ProductKind::generation_current:
        case ProductKind::generation_prior: generations[*p.group_id].push_back(&p); break;
        case ProductKind::bundle: {
            RelationGroup g{*p.group_id, Relation::bundle_with_components, {id}};
            for (const auto& c : p.bundle_components) {
                if (!catalog.contains(c)) throw InputError("bundle " + id + " references unknown component " + c);
                if (std::find(g.members.begin(), g.members.end(), c) != g.members.end())
                    throw InputError("bundle " + id + " lists component " + c + " twice");
                g.members.push_back(c);
            }
            groups.push_back(std::move(g));
            break;
        }
        default: break;
        }
    }

    auto emit = [&](std::map<std::string, std::vector<const Product*>>& by_group, Relation rel) {
        for (auto& [gid, members] : by_group) {
            if (members.size() < 2) {
                if (warnings)
                    warnings->push_back(std::string(to_string(rel)) + " group " + gid + " has a single member (" +
                                        members.front()->product_id + "); skipped");
                continue;
            }
            std::sort(members.begin(), members.end(), [](const Product* a, const Product* b) {
                return std::pair(version_order(a->kind), a->product_id) < std::pair(version_order(b->kind), b->product_id);
            });
            RelationGroup g{gid, rel, {}};
            for (const auto* m : members) g.members.push_back(m->product_id);
            groups.push_back(std::move(g));
        }
    };
    emit(versions, Relation::versions);
    emit(generations, Relation::generations);

    std::sort(groups.begin(), groups.end(), [](const RelationGroup& a, const RelationGroup& b) {
        return std::pair(a.relation, a.group_id) < std::pair(b.relation, b.group_id);
    });

    std::set<std::pair<Relation, std::string>> seen_membership;
    std::map<std::string, Relation> seen_ids;
    for (const auto& g : groups) {
        auto [it, fresh] = seen_ids.emplace(g.group_id, g.relation);
        if (!fresh) throw InputError("group_id " + g.group_id + " is used by more than one relation group");
        for (const auto& m : g.members)
            if (!seen_membership.emplace(g.relation, m).second)
                throw InputError("product " + m + " belongs to more than one " + std::string(to_string(g.relation)) +
                                 " group");
    }
    return groups;
}

std::optional<std::size_t> ProductSeries::find(Timestamp t) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), t,
                               [](const PanelObservation& o, Timestamp v) { return o.timestamp < v; });
    if (it == rows.end() || it->timestamp != t) return std::nullopt;
    return static_cast<std::size_t>(it - rows.begin());
}

PanelDataset::PanelDataset(Catalog catalog, std::vector<RelationGroup> groups,
                           std::map<std::string, ProductSeries, std::less<>> series, ValidationReport report)
    : catalog_(std::move(catalog)), groups_(std::move(groups)), series_(std::move(series)), report_(std::move(report)) {}

const ProductSeries* PanelDataset::find_series(std::string_view id) const {
    auto it = series_.find(id);
    return it == series_.end() ? nullptr : &it->second;
}

const RelationGroup* PanelDataset::find_group(std::string_view group_id) const {
    for (const auto& g : groups_)
        if (g.group_id == group_id) return &g;
    return nullptr;
}

std::size_t PanelDataset::observation_count() const {
    std::size_t n = 0;
    for (const auto& [id, s] : series_) n += s.rows.size();
    return n;
}

namespace {

// Forward-fills runs of an absent price field whose span since the last present value fits the policy.
void fill_field(ProductSeries& s, std::optional<double> PanelObservation::*field, const char* name,
                const ValidationPolicy& policy, ValidationReport& report) {
    auto& rows = s.rows;
    std::size_t i = 0;
    while (i < rows.size()) {
        if (rows[i].*field) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < rows.size() && !(rows[end].*field)) ++end;
        const std::size_t run = end - i;
        bool filled = false;
        if (i > 0) {
            const auto span = rows[end - 1].timestamp - rows[i - 1].timestamp;
            const auto slots = static_cast<long long>(std::llround(static_cast<double>(span.count()) /
                                                                   static_cast<double>(policy.slot_length.count())));
            if (slots <= policy.max_fill_gap) {
                const double value = *(rows[i - 1].*field);
                for (std::size_t j = i; j < end; ++j) {
                    rows[j].*field = value;
                    report.fills.push_back({s.product_id, rows[j].timestamp, name});
                }
                report.price_fills += run;
                filled = true;
            }
        }
        if (!filled) report.price_gaps += run;
        i = end;
    }
}

} // namespace

PanelDataset validate_panel(const ObservationLoad& load, const Catalog& catalog, const ValidationPolicy& policy) {
    if (load.observations.empty()) throw InputError("validate_panel: empty panel");
    if (policy.max_fill_gap < 0) throw InputError("validate_panel: max_fill_gap must be >= 0");
    if (policy.slot_length.count() <= 0) throw InputError("validate_panel: slot length must be positive");

    ValidationReport report;
    report.rows_read = load.rows_read;
    report.rows_rejected = load.rejected;

    std::map<std::string, ProductSeries, std::less<>> series;
    for (const auto& obs : load.observations) {
        if (!catalog.contains(obs.product_id))
            throw InputError("validate_panel: product " + obs.product_id + " is not in the catalog");
        auto& s = series[obs.product_id];
        s.product_id = obs.product_id;
        s.rows.push_back(obs);
    }

    for (auto& [id, s] : series) {
        std::stable_sort(s.rows.begin(), s.rows.end(),
                         [](const PanelObservation& a, const PanelObservation& b) { return a.timestamp < b.timestamp; });
        for (std::size_t i = 1; i < s.rows.size(); ++i) {
            if (s.rows[i].timestamp == s.rows[i - 1].timestamp)
                throw InputError("validate_panel: duplicate timestamp " + format_timestamp(s.rows[i].timestamp) +
                                 " for product " + id);
            const auto step = s.rows[i].timestamp - s.rows[i - 1].timestamp;
            const auto missing = std::llround(static_cast<double>(step.count()) /
                                              static_cast<double>(policy.slot_length.count())) - 1;
            if (missing > 0) report.rank_gaps += static_cast<std::size_t>(missing);
        }
        for (const auto& r : s.rows) {
            if (!r.sales_rank) ++report.rank_gaps;
            if (r.amazon_price && *r.amazon_price > r.list_price) ++report.price_violations;
        }

        fill_field(s, &PanelObservation::amazon_price, "amazon_price", policy, report);
        const bool has_marketplace = std::any_of(s.rows.begin(), s.rows.end(),
                                                 [](const PanelObservation& o) { return o.marketplace_new_price.has_value(); });
        if (has_marketplace) fill_field(s, &PanelObservation::marketplace_new_price, "marketplace_new_price", policy, report);

        const auto& product = catalog.at(id);
        std::size_t early = 0;
        for (const auto& r : s.rows) {
            auto d = days_between(product.release_date, r.timestamp);
            if (d < 0) {
                ++early;
                d = 0;
            }
            s.days_release.push_back(d);
        }
        if (early > 0) {
            report.pre_release_observations += early;
            report.warnings.push_back(id + ": " + std::to_string(early) +
                                      " observations precede the release date; days_release set to 0");
        }
    }

    std::vector<std::string> warnings;
    auto groups = build_relation_groups(catalog, &warnings);
    report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());
    return PanelDataset(catalog, std::move(groups), std::move(series), std::move(report));
}

PanelDataset validate_panel(std::span<const PanelObservation> observations, const Catalog& catalog,
                            const ValidationPolicy& policy) {
    ObservationLoad load;
    load.observations.assign(observations.begin(), observations.end());
    load.rows_read = observations.size();
    return validate_panel(load, catalog, policy);
}

} // namespace rankdemand
