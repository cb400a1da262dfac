#pragma once

#include "rankdemand/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testing_support {

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rankdemand_tests") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

inline rankdemand::Timestamp at(const char* text) { return *rankdemand::parse_timestamp(text); }

inline rankdemand::PanelObservation obs(const std::string& id, rankdemand::Timestamp t, std::optional<double> rank,
                                        std::optional<double> price, double list = 1000.0) {
    rankdemand::PanelObservation o;
    o.product_id = id;
    o.timestamp = t;
    o.sales_rank = rank;
    o.amazon_price = price;
    o.list_price = list;
    return o;
}

inline rankdemand::Product product(const std::string& id, rankdemand::ProductKind kind, std::optional<std::string> group,
                                   std::vector<std::string> components = {}) {
    rankdemand::Product p;
    p.product_id = id;
    p.title = "Title " + id;
    p.release_date = *rankdemand::parse_date("2004-01-01");
    p.kind = kind;
    p.group_id = std::move(group);
    p.bundle_components = std::move(components);
    return p;
}

inline int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

} // namespace testing_support
