#pragma once

#include "rankdemand/artifacts.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rankdemand::report {

/// Artifacts available to the report; absent ones stay empty.
struct Bundle {
    std::optional<io::Json> validation;
    std::optional<io::CalibrationArtifact> calibration;
    std::optional<io::DemandArtifact> demand;
    std::optional<io::CostArtifact> costs;
    std::optional<io::OptimalityArtifact> optimality;
};

/// Loads whatever exists in `out_dir`; files present but unreadable raise ArtifactError.
Bundle load_bundle(const std::filesystem::path& out_dir);

/// "1.91*** (0.58)": estimate, stars from the normal approximation, absolute standard error.
std::string format_estimate(double estimate, double std_error, int decimals = 2);

struct Rendered {
    std::string text;
    io::Json json;
};

Rendered render(const Bundle& bundle);

/// Per-product plot series: <id>_rank_time.csv (timestamp,sales_rank) and <id>_price_rank.csv
/// (sales_rank,amazon_price), one row per observation. Returns rows written per product.
std::vector<std::size_t> write_plot_series(std::span<const PanelObservation> observations,
                                           std::span<const std::string> products, const std::filesystem::path& dir);

} // namespace rankdemand::report
