#pragma once

#include "rankdemand/cost.hpp"
#include "rankdemand/dataset.hpp"
#include "rankdemand/demand.hpp"
#include "rankdemand/optimal.hpp"
#include "rankdemand/rankmap.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rankdemand::io {

using Json = nlohmann::ordered_json;

/// Number rounded to 12 significant digits; non-finite values become null.
Json number(double value);
Json number(const std::optional<double>& value);
/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

/// Reads and parses an artifact; missing files and parse errors raise ArtifactError naming `artifact`.
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

Json to_json(const ValidationReport& report);

struct CalibrationArtifact {
    ParetoCalibration calibration;
    double theta = 0.30;
    double min_abs_drop = 100.0;
    std::size_t events = 0;
    std::size_t implausible_pairs = 0;
};
Json to_json(const CalibrationArtifact& a);
CalibrationArtifact calibration_from_json(const Json& j, const std::string& artifact);

/// Demand stage output for one group, plus the elasticity matrix it implies.
struct DemandGroup {
    std::string group_id;
    Relation relation = Relation::versions;
    std::vector<std::string> members;
    std::vector<DemandEstimates> estimates;  // one per member, group order
    double beta_used = 0.0;
};

struct DemandArtifact {
    CalibrationArtifact calibration;
    bool pooled = false;
    std::vector<std::string> controls;
    std::vector<DemandGroup> groups;
    std::vector<std::string> failures;  // "group_id: reason"
};
Json to_json(const DemandArtifact& a);
DemandArtifact demand_from_json(const Json& j, const std::string& artifact);
ElasticityMatrix elasticity_of(const DemandGroup& g);

struct CostGroup {
    CostEstimate estimate;
    std::string share_method;
    std::string window;
    std::size_t window_rows = 0;
};

struct CostArtifact {
    std::vector<CostGroup> groups;
    std::vector<std::string> failures;
};
Json to_json(const CostArtifact& a);
CostArtifact costs_from_json(const Json& j, const std::string& artifact);

struct OptimalityGroup {
    std::string group_id;
    std::vector<OptimalityVerdict> members;
    double tolerance = kDefaultTolerance;
    double k = 1.0;
    std::string window;
};

struct OptimalityArtifact {
    std::vector<OptimalityGroup> groups;
    std::vector<std::string> failures;
};
Json to_json(const OptimalityArtifact& a);
OptimalityArtifact optimality_from_json(const Json& j, const std::string& artifact);

} // namespace rankdemand::io
