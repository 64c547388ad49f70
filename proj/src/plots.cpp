#include "cardan/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "cardan/error.hpp"

namespace cardan {

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) throw FormatError("nothing to plot for " + title);
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kHeight - kMargin - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n"
      << "<text x=\"15\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << kHeight / 2 << ")\">" << y_label << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\">"
        << number(xv) << "</text>\n"
        << "<text x=\"" << kMargin - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << number(yv)
        << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].points) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    if (!series[i].label.empty()) {
      const double ly = kMargin + 16.0 * static_cast<double>(i);
      svg << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\"" << ly << "\" fill=\"" << colour << "\">"
          << series[i].label << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

Series column_series(const CsvTable& t, std::string_view x, std::string_view y, std::string label = {}) {
  Series s{std::move(label), {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) s.points.emplace_back(t.number(r, x), t.number(r, y));
  return s;
}

bool has_all(const CsvTable& t, std::initializer_list<std::string_view> names) {
  return std::all_of(names.begin(), names.end(), [&](auto n) { return t.has_column(n); });
}

}  // namespace

std::vector<PlotFile> render_plots(const CsvTable& table) {
  if (table.rows.empty()) throw FormatError("cannot plot an empty table");

  if (has_all(table, {"iteration", "L_contextual", "L_perceptual", "L_message", "total", "best_total"})) {
    return {{"loss_trace", line_plot("Optimization trace", "iteration", "loss",
                                     {column_series(table, "iteration", "total", "total"),
                                      column_series(table, "iteration", "best_total", "best")})}};
  }
  if (has_all(table, {"mode", "si", "budget", "mean_ber"})) {
    std::map<int, Series> by_si;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (table.rows[r][table.column("mode")] != "soft") continue;
      const int si = static_cast<int>(table.number(r, "si"));
      auto& s = by_si[si];
      s.label = "si=" + std::to_string(si);
      s.points.emplace_back(table.number(r, "budget"), table.number(r, "mean_ber"));
    }
    std::vector<Series> series;
    for (auto& [si, s] : by_si) series.push_back(std::move(s));
    if (series.empty()) throw FormatError("BER table has no soft-mode rows");
    return {{"ber_vs_budget", line_plot("Bit error rate", "iterations", "mean BER", series)}};
  }
  if (has_all(table, {"size", "popcount", "capacity_bits", "message_loss", "ber"})) {
    return {{"ber_vs_grille_size", line_plot("BER vs grille size", "grille side", "BER",
                                             {column_series(table, "size", "ber")})},
            {"message_loss_vs_grille_size", line_plot("Message loss vs grille size", "grille side", "message loss",
                                                      {column_series(table, "size", "message_loss")})}};
  }
  if (has_all(table, {"iteration", "best_total", "best_message_loss"})) {
    return {{"zero_message_convergence",
             line_plot("Zero-message convergence", "iteration", "loss",
                       {column_series(table, "iteration", "best_total", "total"),
                        column_series(table, "iteration", "best_message_loss", "message")})}};
  }
  throw FormatError("unrecognised CSV schema");
}

}  // namespace cardan
