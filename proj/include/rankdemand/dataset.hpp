#pragma once

#include "rankdemand/timeutil.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankdemand {

enum class Category { business_productivity, security_utilities, graphics_development, operating_systems };

enum class ProductKind {
    standalone,
    version_high,
    version_low,
    version_mid,
    bundle,
    component,
    generation_current,
    generation_prior,
};

enum class Relation { versions, bundle_with_components, generations };

std::string_view to_string(Category c);
std::string_view to_string(ProductKind k);
std::string_view to_string(Relation r);
std::optional<Category> parse_category(std::string_view token);
std::optional<ProductKind> parse_kind(std::string_view token);
std::optional<Relation> parse_relation(std::string_view token);

/// One scraped (product, timestamp) row. Absent optionals are empty CSV fields.
struct PanelObservation {
    std::string product_id;
    Timestamp timestamp{};
    /// Absent when the rank was not captured; never filled. Simulator output may carry non-integral ranks.
    std::optional<double> sales_rank;
    /// Absent when the price was not captured; eligible for bounded forward fill.
    std::optional<double> amazon_price;
    double list_price = 0.0;
    std::optional<double> marketplace_new_price;
    std::optional<double> avg_rating;
    long long n_reviews = 0;

    bool operator==(const PanelObservation&) const = default;
};

struct RowReject {
    std::size_t row = 0;  // 1-based line number in the file (header is line 1)
    std::string reason;
};

struct ObservationLoad {
    std::vector<PanelObservation> observations;
    std::vector<RowReject> rejected;
    std::size_t rows_read = 0;
};

inline constexpr std::string_view kObservationHeader =
    "product_id,timestamp,sales_rank,amazon_price,list_price,marketplace_new_price,avg_rating,n_reviews";
inline constexpr std::string_view kCatalogHeader =
    "product_id,title,category,release_date,kind,group_id,bundle_components";

/// Parses observations.csv. Row-level problems are collected; with `strict` the first one throws InputError.
ObservationLoad load_observations(const std::filesystem::path& path, bool strict = false);
ObservationLoad parse_observations(std::istream& in, bool strict = false);
void write_observations(std::ostream& out, std::span<const PanelObservation> rows);
void write_observations(const std::filesystem::path& path, std::span<const PanelObservation> rows);

struct Product {
    std::string product_id;
    std::string title;
    Category category = Category::business_productivity;
    Date release_date{};
    ProductKind kind = ProductKind::standalone;
    std::optional<std::string> group_id;
    std::vector<std::string> bundle_components;

    bool operator==(const Product&) const = default;
};

class Catalog {
public:
    Catalog() = default;
    /// Validates per-product invariants and rejects duplicate ids.
    explicit Catalog(std::vector<Product> products);

    const Product* find(std::string_view id) const;
    const Product& at(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }
    std::size_t size() const noexcept { return products_.size(); }
    const std::map<std::string, Product, std::less<>>& products() const noexcept { return products_; }

private:
    std::map<std::string, Product, std::less<>> products_;
};

Catalog load_catalog(const std::filesystem::path& path);
Catalog parse_catalog(std::istream& in);
void write_catalog(std::ostream& out, const Catalog& catalog);
void write_catalog(const std::filesystem::path& path, const Catalog& catalog);

struct RelationGroup {
    std::string group_id;
    Relation relation = Relation::versions;
    std::vector<std::string> members;  // ordered: high/mid/low, bundle then components, current then prior

    bool operator==(const RelationGroup&) const = default;
};

/// Groups sorted by (relation, group_id). Single-member groups are skipped with a warning.
std::vector<RelationGroup> build_relation_groups(const Catalog& catalog, std::vector<std::string>* warnings = nullptr);

struct ValidationPolicy {
    /// Longest run of missing price slots that is forward-filled.
    int max_fill_gap = 3;
    std::chrono::seconds slot_length = std::chrono::hours{8};
};

struct FillRecord {
    std::string product_id;
    Timestamp timestamp{};
    std::string field;
};

struct ValidationReport {
    std::size_t rows_read = 0;
    std::vector<RowReject> rows_rejected;
    std::size_t price_fills = 0;
    std::size_t price_gaps = 0;  // missing price slots left unfilled
    std::size_t rank_gaps = 0;   // missing rank slots (absent field or missing row)
    std::size_t price_violations = 0;  // amazon_price > list_price
    std::size_t pre_release_observations = 0;
    std::vector<FillRecord> fills;
    std::vector<std::string> warnings;
};

/// Observations of one product, strictly increasing in time, with days since release per row.
struct ProductSeries {
    std::string product_id;
    std::vector<PanelObservation> rows;
    std::vector<long long> days_release;

    /// Row index at exactly `t`, if any.
    std::optional<std::size_t> find(Timestamp t) const;
};

/// Immutable validated panel.
class PanelDataset {
public:
    PanelDataset(Catalog catalog, std::vector<RelationGroup> groups, std::map<std::string, ProductSeries, std::less<>> series,
                 ValidationReport report);

    const Catalog& catalog() const noexcept { return catalog_; }
    const std::vector<RelationGroup>& groups() const noexcept { return groups_; }
    const ValidationReport& report() const noexcept { return report_; }
    const std::map<std::string, ProductSeries, std::less<>>& series() const noexcept { return series_; }
    const ProductSeries* find_series(std::string_view id) const;
    const RelationGroup* find_group(std::string_view group_id) const;
    std::size_t observation_count() const;

private:
    Catalog catalog_;
    std::vector<RelationGroup> groups_;
    std::map<std::string, ProductSeries, std::less<>> series_;
    ValidationReport report_;
};

PanelDataset validate_panel(const ObservationLoad& load, const Catalog& catalog, const ValidationPolicy& policy = {});
PanelDataset validate_panel(std::span<const PanelObservation> observations, const Catalog& catalog,
                            const ValidationPolicy& policy = {});

/// Shortest decimal text that round-trips.
std::string format_number(double value);

} // namespace rankdemand
