#include "seqjsp/gantt.hpp"

#include <algorithm>
#include <cstdio>

namespace seqjsp {

GanttLayout gantt_layout(const Schedule& s) {
  GanttLayout layout;
  layout.horizon = s.makespan();
  layout.rows.resize(static_cast<std::size_t>(s.n_machines()));
  for (int i = 0; i < s.n_jobs(); ++i)
    for (int j = 0; j < s.n_machines(); ++j) {
      const auto& e = s.at(i, j);
      layout.rows[static_cast<std::size_t>(e.machine)].push_back({i, j, e.start, e.end});
    }
  for (auto& row : layout.rows)
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return layout;
}

namespace {

char job_glyph(int job) {
  static constexpr char kGlyphs[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  return kGlyphs[job % (sizeof(kGlyphs) - 1)];
}

std::string job_colour(int job, int n_jobs) {
  char buf[32];
  const int hue = (job * 360) / std::max(n_jobs, 1);
  std::snprintf(buf, sizeof(buf), "hsl(%d,65%%,70%%)", hue);
  return buf;
}

}  // namespace

std::string render_gantt_svg(const Schedule& s) {
  const auto layout = gantt_layout(s);
  constexpr int kLabelWidth = 50;
  constexpr int kRowHeight = 30;
  constexpr int kPlotWidth = 800;
  const double scale = layout.horizon > 0 ? static_cast<double>(kPlotWidth) / layout.horizon : 1.0;
  const int height = kRowHeight * (s.n_machines() + 1) + 10;
  const int width = kLabelWidth + kPlotWidth + 20;

  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\" "
                "font-family=\"monospace\" font-size=\"11\">\n",
                width, height, width, height);
  out += buf;
  for (std::size_t mach = 0; mach < layout.rows.size(); ++mach) {
    const int y = static_cast<int>(mach) * kRowHeight + 5;
    std::snprintf(buf, sizeof(buf), "<text x=\"5\" y=\"%d\">M%zu</text>\n", y + 19, mach);
    out += buf;
    for (const auto& box : layout.rows[mach]) {
      const double x = kLabelWidth + box.start * scale;
      const double w = (box.end - box.start) * scale;
      std::snprintf(buf, sizeof(buf),
                    "<rect class=\"op\" data-job=\"%d\" data-pos=\"%d\" data-start=\"%d\" data-end=\"%d\" x=\"%.3f\" "
                    "y=\"%d\" width=\"%.3f\" height=\"%d\" fill=\"%s\" stroke=\"black\"/>\n",
                    box.job, box.pos, box.start, box.end, x, y, w, kRowHeight - 6,
                    job_colour(box.job, s.n_jobs()).c_str());
      out += buf;
      std::snprintf(buf, sizeof(buf), "<text x=\"%.3f\" y=\"%d\" text-anchor=\"middle\">J%d.%d</text>\n", x + w / 2,
                    y + 17, box.job, box.pos);
      out += buf;
    }
  }
  const int axis_y = s.n_machines() * kRowHeight + 5;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n"
                "<text x=\"%d\" y=\"%d\">0</text>\n<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%d</text>\n",
                kLabelWidth, axis_y, kLabelWidth + kPlotWidth, axis_y, kLabelWidth, axis_y + 15,
                kLabelWidth + kPlotWidth, axis_y + 15, layout.horizon);
  out += buf;
  out += "</svg>\n";
  return out;
}

std::string render_gantt_text(const Schedule& s, int max_width) {
  const auto layout = gantt_layout(s);
  const int horizon = std::max(layout.horizon, 1);
  const int unit = (horizon + max_width - 1) / std::max(max_width, 1);
  const int cols = (horizon + unit - 1) / unit;

  std::string out = "horizon " + std::to_string(layout.horizon) + " (1 column = " + std::to_string(unit) +
                    (unit == 1 ? " time unit)\n" : " time units)\n");
  const int label_width = static_cast<int>(std::to_string(s.n_machines() - 1).size()) + 1;
  for (std::size_t mach = 0; mach < layout.rows.size(); ++mach) {
    std::string row(static_cast<std::size_t>(cols), '.');
    // A column shows the job running at the column's first time unit.
    for (const auto& box : layout.rows[mach])
      for (int c = (box.start + unit - 1) / unit; c * unit < box.end && c < cols; ++c)
        row[static_cast<std::size_t>(c)] = job_glyph(box.job);
    auto label = "M" + std::to_string(mach);
    label.resize(static_cast<std::size_t>(label_width + 1), ' ');
    out += label + '|' + row + "|\n";
  }
  return out;
}

}  // namespace seqjsp
