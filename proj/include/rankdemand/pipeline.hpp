#pragma once

#include "rankdemand/artifacts.hpp"
#include "rankdemand/cost.hpp"
#include "rankdemand/dataset.hpp"
#include "rankdemand/demand.hpp"
#include "rankdemand/rankmap.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rankdemand::pipeline {

/// Exit statuses shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitArtifact = 4;

enum class Stage { validate, calibrate, demand, costs, optimality, report };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view token);

/// Selection of aligned rows: all | first:N | last:N | range:A:B (0-based, half-open).
struct Window {
    enum class Kind { all, first, last, range };
    Kind kind = Kind::all;
    std::size_t a = 0;
    std::size_t b = 0;

    static Window parse(std::string_view text);
    std::string str() const;
    /// [begin, end) within n rows. Throws InputError when the window selects nothing.
    std::pair<std::size_t, std::size_t> bounds(std::size_t n) const;
    bool operator==(const Window&) const = default;
};

enum class ShareMethod { direct, rank_ratio };
std::string_view to_string(ShareMethod m);
std::optional<ShareMethod> parse_share_method(std::string_view token);

struct PipelineConfig {
    std::filesystem::path observations;
    std::filesystem::path catalog;
    std::filesystem::path calibration_observations;  // defaults to `observations`
    std::filesystem::path out_dir = "out";
    bool strict = false;
    ValidationPolicy validation;

    double theta = 0.30;
    double min_abs_drop = 100.0;
    double demand_bound = kDefaultDemandBound;
    bool use_published_calibration = false;

    DemandSpec demand;
    bool pooled = false;

    ShareMethod share_method = ShareMethod::direct;
    bool literal_rank_shares = false;  // two-product replication form
    Window window;

    double tolerance = 0.01;
    double k = 1.0;
    std::optional<Window> eval_window;  // defaults to the cost window

    unsigned threads = 1;
    bool quiet = false;
    std::vector<std::string> plot_products;  // empty: every grouped product

    /// Throws InputError on out-of-range settings.
    void validate() const;
};

/// Key-value file (INI without sections); relative paths resolve against `base`.
PipelineConfig parse_pipeline_config(std::istream& in, const std::filesystem::path& base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Standard artifact locations under the output directory.
struct ArtifactPaths {
    std::filesystem::path validation, calibration, demand, costs, optimality, report_text, report_json, plots;
    explicit ArtifactPaths(const std::filesystem::path& out_dir);
};

PanelDataset load_panel(const PipelineConfig& config);

io::CalibrationArtifact run_calibrate(const PipelineConfig& config);
io::DemandArtifact run_demand(const PipelineConfig& config, const io::CalibrationArtifact& calibration,
                              const PanelDataset& panel);
io::CostArtifact run_costs(const PipelineConfig& config, const io::DemandArtifact& demand, const PanelDataset& panel);
io::OptimalityArtifact run_optimality(const PipelineConfig& config, const io::DemandArtifact& demand,
                                      const io::CostArtifact& costs, const PanelDataset& panel);

/// Window averages for one group: rows where every member has both rank and price.
struct GroupWindow {
    std::vector<double> prices;
    std::vector<double> quantities;
    Eigen::VectorXd shares;
    std::size_t rows = 0;
    std::size_t aligned_rows = 0;
};
GroupWindow group_window(std::span<const std::string> members, const PanelDataset& panel, const Window& window,
                         const ParetoCalibration& calibration, ShareMethod method, bool literal_rank_shares = false);

/// Runs stages from `from` through `to`, reading earlier stages from persisted artifacts.
/// Errors propagate with the failing stage named; earlier artifacts stay on disk.
void run_pipeline(const PipelineConfig& config, Stage from = Stage::validate, Stage to = Stage::report,
                  std::ostream* log = nullptr);

/// Maps an exception to the CLI exit status.
int exit_code_for(const std::exception& e);

} // namespace rankdemand::pipeline
