#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <string>

#include "assist/errors.hpp"
#include "assist/harness.hpp"

namespace assist {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v, const char* pattern = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

struct Series {
  std::string algorithm;
  // round -> values across seeds
  std::map<int, std::vector<double>> values;
};

std::vector<Series> collect(const CsvTable& table, std::size_t metric_col) {
  const std::size_t algo_col = table.column("algorithm");
  const std::size_t round_col = table.column("round");
  std::vector<Series> series;
  for (const auto& row : table.rows) {
    const std::string& cell = row[metric_col];
    if (cell.empty()) continue;
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.algorithm == row[algo_col]; });
    if (it == series.end()) {
      series.push_back({row[algo_col], {}});
      it = series.end() - 1;
    }
    it->values[std::stoi(row[round_col])].push_back(std::stod(cell));
  }
  return series;
}

void render(const std::string& metric, const std::vector<Series>& series,
            const std::filesystem::path& path) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series)
    for (const auto& [round, vals] : s.values) {
      x_min = std::min(x_min, static_cast<double>(round));
      x_max = std::max(x_max, static_cast<double>(round));
      y_min = std::min(y_min, *std::min_element(vals.begin(), vals.end()));
      y_max = std::max(y_max, *std::max_element(vals.begin(), vals.end()));
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << metric << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y_min + (y_max - y_min) * i / 4.0;
    out << "<line x1=\"" << kLeft - 4 << "\" x2=\"" << kLeft << "\" y1=\"" << fmt(py(y))
        << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(y) + 4)
        << "\" text-anchor=\"end\">" << fmt(y, "%.3g") << "</text>\n";
    const double x = x_min + (x_max - x_min) * i / 4.0;
    out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << fmt(x, "%.3g") << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">round</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::size_t max_seeds = 0;
    for (const auto& [round, vals] : series[s].values) max_seeds = std::max(max_seeds, vals.size());
    if (max_seeds > 1) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (const auto& [round, vals] : series[s].values)
        out << fmt(px(round)) << ',' << fmt(py(*std::max_element(vals.begin(), vals.end()))) << ' ';
      for (auto it = series[s].values.rbegin(); it != series[s].values.rend(); ++it)
        out << fmt(px(it->first)) << ','
            << fmt(py(*std::min_element(it->second.begin(), it->second.end()))) << ' ';
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [round, vals] : series[s].values) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      out << fmt(px(round)) << ',' << fmt(py(mean)) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 14 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << kWidth - kRight + 12 << "\" x2=\"" << kWidth - kRight + 36
        << "\" y1=\"" << fmt(ly - 4) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 42 << "\" y=\"" << fmt(ly) << "\">"
        << series[s].algorithm << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_plot(const std::filesystem::path& metrics_csv,
                                             const PlotSpec& spec) {
  const CsvTable table = read_csv_table(metrics_csv);
  table.column("algorithm");
  table.column("round");
  std::vector<std::string> metrics = spec.metrics;
  if (metrics.empty()) {
    for (const char* name : {"global_train_loss", "test_metric_1", "test_metric_2"}) {
      const std::size_t col = table.column(name);
      if (std::any_of(table.rows.begin(), table.rows.end(),
                      [&](const auto& row) { return !row[col].empty(); }))
        metrics.push_back(name);
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  std::vector<std::filesystem::path> files;
  for (const auto& metric : metrics) {
    const auto series = collect(table, table.column(metric));
    if (series.empty()) throw InvalidArgument("column \"" + metric + "\" has no values");
    const auto path = spec.out_dir / (metric + ".svg");
    render(metric, series, path);
    files.push_back(path);
  }
  return files;
}

}  // namespace assist
