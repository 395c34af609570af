#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dgs/histogram.hpp"
#include "dgs/io.hpp"

namespace dgs::io {

namespace {

void check_panels(std::span<const PlotPanel> panels) {
  if (panels.empty())
    throw Error(ErrorKind::InvalidArgument, "histogram plot needs at least one panel");
  const int n = panels.front().hist.size();
  for (const auto& p : panels)
    if (p.hist.size() != n)
      throw Error(ErrorKind::LengthMismatch, "histogram panels differ in bin count",
                  p.label);
}

std::string title_of(const PlotPanel& panel) {
  const auto mean = panel.mean_difficulty ? panel.mean_difficulty : mean_difficulty(panel.hist);
  char buf[64];
  if (mean)
    std::snprintf(buf, sizeof buf, " (mean difficulty %.3f)", *mean);
  else
    std::snprintf(buf, sizeof buf, " (mean difficulty n/a)");
  return panel.label + buf;
}

std::string interval(const BinningSpec& spec, int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "[%.2f, %.2f%c", spec.lower_edge(k),
                spec.lower_edge(k + 1), k + 1 == spec.bin_count ? ']' : ')');
  return buf;
}

std::string escape_xml(std::string_view s) {
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

}  // namespace

std::string render_svg(std::span<const PlotPanel> panels) {
  check_panels(panels);
  constexpr double kPanelW = 360, kPanelH = 260, kMargin = 40, kTop = 36;
  const double width = kPanelW * static_cast<double>(panels.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\" font-family=\"sans-serif\" font-size=\"11\">\n",
                width, kPanelH, width, kPanelH);
  out << buf;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& hist = panels[p].hist;
    const int n = hist.size();
    const double x0 = kPanelW * static_cast<double>(p) + kMargin;
    const double plot_w = kPanelW - 1.5 * kMargin;
    const double plot_h = kPanelH - kTop - kMargin;
    const double base = kTop + plot_h;
    const double peak = n > 0 ? hist.counts.maxCoeff() : 0.0;
    const double bar_w = plot_w / n;

    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"20\" text-anchor=\"middle\" font-size=\"12\">",
                  x0 + plot_w / 2);
    out << buf << escape_xml(title_of(panels[p])) << "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  x0, base, x0 + plot_w, base, x0, kTop, x0, base);
    out << buf;
    for (int k = 0; k < n; ++k) {
      const double h = peak > 0 ? plot_h * hist.counts[k] / peak : 0.0;
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                    "fill=\"#4c72b0\"><title>%s: %g</title></rect>\n",
                    x0 + k * bar_w + 0.5, base - h, std::max(bar_w - 1.0, 0.5), h,
                    escape_xml(interval(hist.spec, k)).c_str(), hist.counts[k]);
      out << buf;
    }
    for (double tick : {0.0, 0.5, 1.0}) {
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.1f</text>\n",
                    x0 + tick * plot_w, base + 14, tick);
      out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">difficulty</text>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%g</text>\n",
                  x0 + plot_w / 2, base + 28, x0 - 4, kTop + 4, peak);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_text(std::span<const PlotPanel> panels, int width) {
  check_panels(panels);
  std::ostringstream out;
  for (const auto& panel : panels) {
    const auto& hist = panel.hist;
    const double peak = hist.size() > 0 ? hist.counts.maxCoeff() : 0.0;
    out << "== " << title_of(panel) << " ==\n";
    for (int k = 0; k < hist.size(); ++k) {
      const int len =
          peak > 0 ? static_cast<int>(std::lround(width * hist.counts[k] / peak)) : 0;
      char count[32];
      std::snprintf(count, sizeof count, "%g", hist.counts[k]);
      out << interval(hist.spec, k) << ' ' << std::string(static_cast<std::size_t>(len), '#')
          << ' ' << count << '\n';
    }
    out << '\n';
  }
  return out.str();
}

void emit_histogram_plot(std::span<const PlotPanel> panels,
                         const std::filesystem::path& path) {
  const std::string svg = render_svg(panels);
  const std::string text = render_text(panels);
  write_file_atomic(path, svg);
  auto text_path = path;
  text_path.replace_extension(".txt");
  write_file_atomic(text_path, text);
}

}  // namespace dgs::io
