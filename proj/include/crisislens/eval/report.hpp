#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crisislens/eval/metrics.hpp"
#include "crisislens/eval/protocols.hpp"
#include "json.hpp"

namespace crisislens::eval {

nlohmann::ordered_json to_json(const MetricsReport& r);
std::string to_csv(const MetricsReport& r);

// Throws a schema error when a stored rate disagrees with its counts.
void check_consistency(const MetricsReport& r);

struct Series {
  std::string name;
  std::vector<std::pair<double, std::optional<double>>> points;  // absent y breaks the line
};

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          std::span<const Series> series);

Series detection_series(const std::string& name, std::span<const CurvePoint> curve);
Series stability_series(const std::string& name, std::span<const StabilityBucket> buckets);
Series depth_series(const std::string& name, const DepthDistribution& depth);

std::string curve_csv(std::span<const CurvePoint> curve);

nlohmann::ordered_json to_json(const CompareResult& r);
// Side-by-side text table, ending with the implicit-subset mild recall of
// the full model, the ablation and their margin.
std::string format_compare(const CompareResult& r);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace crisislens::eval
