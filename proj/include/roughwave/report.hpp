#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace roughwave {

struct FitItem {
    std::string name;
    double ratio = 0.0;
    std::optional<double> parameter;  // sweep coordinate, plotted on a log axis
    std::string group;                // ratio families are bounded group by group
};

// Declared acceptance for a ratio family.
struct FitBound {
    std::optional<double> max_over_median = 3.0;
    std::optional<double> slope_max;
};

struct FitReport {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    std::vector<FitItem> items;
    FitBound bound;
    double max = 0.0;
    double median = 0.0;
    std::optional<double> slope;
    bool extra_ok = true;  // check-specific conditions beyond the ratio family
    bool pass = false;
    nlohmann::json details = nlohmann::json::object();

    // Recomputes max, median and pass from the items, slope and bound. Each
    // group must satisfy max <= bound * median on its own.
    void finalize();
};

double median_of(std::vector<double> xs);
// Least-squares slope of y on x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const FitReport& r);
FitReport fit_report_from_json(const nlohmann::json& j);
std::string to_csv(const FitReport& r);
std::string to_svg(const FitReport& r);

// <dir>/<check>.json, .csv and, when plots is set, .svg
void write_report(const FitReport& r, const std::filesystem::path& dir, bool plots);

}  // namespace roughwave
