#include "crisislens/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "crisislens/error.hpp"

namespace crisislens::eval {

namespace {

const char* kIntensityNames[] = {"mild", "moderate", "strong"};

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(const std::optional<double>& v, int digits = 4) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string bucket_label(const StabilityBucket& b) {
  if (b.max_len == std::numeric_limits<std::size_t>::max()) return std::to_string(b.min_len) + "+";
  return std::to_string(b.min_len) + "-" + std::to_string(b.max_len);
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["cdr"] = r.cdr;
  nlohmann::ordered_json depth;
  for (std::size_t k = 0; k < 3; ++k) depth[kIntensityNames[k]] = opt(r.intensity_recall[k]);
  j["intensity_recall"] = depth;
  if (!r.mechanism_recall.empty()) {
    nlohmann::ordered_json mech;
    for (const auto& [m, v] : r.mechanism_recall) mech[std::string(corpus::to_string(m))] = opt(v);
    j["mechanism_recall"] = mech;
  }
  if (!r.stability.empty()) {
    nlohmann::ordered_json st = nlohmann::ordered_json::array();
    for (const auto& b : r.stability) {
      st.push_back({{"lengths", bucket_label(b)}, {"count", b.count}, {"stability", opt(b.stability)}});
    }
    j["stability_metric"] = kStabilityMetric;
    j["stability"] = st;
  }
  return j;
}

std::string to_csv(const MetricsReport& r) {
  std::string out = "metric,value\n";
  auto row = [&](const std::string& k, const std::string& v) { out += k + "," + v + "\n"; };
  row("n", std::to_string(r.n));
  row("tp", std::to_string(r.counts.tp));
  row("fp", std::to_string(r.counts.fp));
  row("tn", std::to_string(r.counts.tn));
  row("fn", std::to_string(r.counts.fn));
  row("precision", num(r.precision));
  row("recall", num(r.recall));
  row("f1", num(r.f1));
  row("cdr", num(r.cdr));
  for (std::size_t k = 0; k < 3; ++k) {
    row(std::string("intensity_recall_") + kIntensityNames[k], r.intensity_recall[k] ? num(*r.intensity_recall[k]) : "");
  }
  for (const auto& [m, v] : r.mechanism_recall) {
    row("mechanism_recall_" + std::string(corpus::to_string(m)), v ? num(*v) : "");
  }
  for (const auto& b : r.stability) row("stability_" + bucket_label(b), b.stability ? num(*b.stability) : "");
  return out;
}

void check_consistency(const MetricsReport& r) {
  const double expect[] = {r.counts.precision(), r.counts.recall(), r.counts.f1(), r.counts.recall()};
  const double got[] = {r.precision, r.recall, r.f1, r.cdr};
  const char* names[] = {"precision", "recall", "f1", "cdr"};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(expect[i] - got[i]) > 1e-12) fail(ErrorKind::Schema, std::string(names[i]) + " disagrees with counts");
    if (got[i] < 0.0 || got[i] > 1.0) fail(ErrorKind::Schema, std::string(names[i]) + " outside [0,1]");
  }
  if (r.counts.total() != r.n) fail(ErrorKind::Schema, "confusion counts do not sum to n");
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          std::span<const Series> series) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = 0.0, ymax = 1.0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      if (y) {
        ymin = std::min(ymin, *y);
        ymax = std::max(ymax, *y);
      }
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n",
                W, H);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">", (W - R + L) / 2);
  out += buf + escape_xml(title) + "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                L, H - B, W - R, H - B, L, T, L, H - B);
  out += buf;
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%g</text>\n", px(xv), H - B + 16,
                  xv);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n", L - 6, py(yv) + 4,
                  yv);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">", (W - R + L) / 2, H - 18);
  out += buf + escape_xml(x_label) + "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"18\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 18 %.1f)\">",
                (H - B + T) / 2, (H - B + T) / 2);
  out += buf + escape_xml(y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    std::string path;
    bool pen = false;
    for (const auto& [x, y] : series[s].points) {
      if (!y) {
        pen = false;
        continue;
      }
      std::snprintf(buf, sizeof buf, "%s%.1f %.1f ", pen ? "L" : "M", px(x), py(*y));
      path += buf;
      pen = true;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n", px(x), py(*y), color);
      out += buf;
    }
    if (!path.empty()) {
      out += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    }
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" fill=\"%s\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\">",
                  W - R + 15, T + 20.0 * s, color, W - R + 32, T + 20.0 * s + 10);
    out += buf + escape_xml(series[s].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

Series detection_series(const std::string& name, std::span<const CurvePoint> curve) {
  Series s{name, {}};
  for (const auto& p : curve) s.points.emplace_back(static_cast<double>(p.consumed), p.cdr);
  return s;
}

Series stability_series(const std::string& name, std::span<const StabilityBucket> buckets) {
  Series s{name, {}};
  for (const auto& b : buckets) {
    const double hi = b.max_len == std::numeric_limits<std::size_t>::max() ? static_cast<double>(b.min_len)
                                                                           : static_cast<double>(b.max_len);
    s.points.emplace_back((static_cast<double>(b.min_len) + hi) / 2.0, b.stability);
  }
  return s;
}

Series depth_series(const std::string& name, const DepthDistribution& depth) {
  Series s{name, {}};
  for (std::size_t k = 0; k < 3; ++k) s.points.emplace_back(static_cast<double>(k), depth[k]);
  return s;
}

std::string curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "consumed,anchor,window_count,cdr\n";
  for (const auto& p : curve) {
    out += std::to_string(p.consumed) + "," + std::to_string(p.anchor) + "," + std::to_string(p.window_count) + "," +
           (p.cdr ? num(*p.cdr) : "") + "\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const CompareResult& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (const auto& row : r.rows) rows[row.name] = to_json(row.metrics);
  j["models"] = rows;
  j["implicit_subset"] = {{"count", r.implicit_count},
                          {"full_mild_recall", opt(r.full_implicit_mild)},
                          {"ablation_mild_recall", opt(r.ablation_implicit_mild)},
                          {"margin", opt(r.implicit_mild_margin())}};
  return j;
}

std::string format_compare(const CompareResult& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s %9s %9s %9s %7s %9s %7s\n", "model", "P", "R", "F1", "CDR",
                "explicit", "implicit", "sarcasm", "mild", "moderate", "strong");
  out += buf;
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    auto mech = [&](corpus::Mechanism k) {
      auto it = m.mechanism_recall.find(k);
      return it == m.mechanism_recall.end() ? std::optional<double>() : it->second;
    };
    std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f %8.4f %8.4f %9s %9s %9s %7s %9s %7s\n", row.name.c_str(),
                  m.precision, m.recall, m.f1, m.cdr, fixed(mech(corpus::Mechanism::Explicit)).c_str(),
                  fixed(mech(corpus::Mechanism::Implicit)).c_str(), fixed(mech(corpus::Mechanism::Sarcasm)).c_str(),
                  fixed(m.intensity_recall[0]).c_str(), fixed(m.intensity_recall[1]).c_str(),
                  fixed(m.intensity_recall[2]).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "implicit subset (n=%zu) mild-intensity recall: full %s, ablation (lambda1=0) %s, margin %s\n",
                r.implicit_count, fixed(r.full_implicit_mild).c_str(), fixed(r.ablation_implicit_mild).c_str(),
                fixed(r.implicit_mild_margin()).c_str());
  out += buf;
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << text;
}

}  // namespace crisislens::eval
