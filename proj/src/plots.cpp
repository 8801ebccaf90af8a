#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gridcast/harness.hpp"

namespace gridcast {

std::string curves_csv(const ArchResult& arch) {
  if (arch.train_rle.empty()) throw DataError("curves_csv: no epochs recorded");
  std::string csv = "epoch,train_rle,val_rle,test_rle\n";
  for (std::size_t e = 0; e < arch.train_rle.size(); ++e) {
    csv += std::to_string(e);
    csv += ',';
    csv += format_double(arch.train_rle[e]);
    csv += ',';
    csv += format_double(arch.val_rle[e]);
    csv += ',';
    csv += format_double(arch.test_rle[e]);
    csv += '\n';
  }
  return csv;
}

namespace {

const char* arch_color(const std::string& name) {
  if (name == "mlp") return "#888888";
  if (name == "tdrn") return "#1f77b4";
  if (name == "lrcn") return "#2ca02c";
  if (name == "sccn") return "#d62728";
  return "#9467bd";
}

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

const std::vector<double>& pick_series(const ArchResult& a,
                                       const std::string& split) {
  if (split == "train") return a.train_rle;
  if (split == "val") return a.val_rle;
  if (split == "test") return a.test_rle;
  throw DataError("unknown split name: " + split);
}

}  // namespace

std::string curves_svg(const std::vector<ArchResult>& archs,
                       const std::string& split_name) {
  if (archs.empty() || pick_series(archs.front(), split_name).empty())
    throw DataError("curves_svg: no epochs recorded");

  const int width = 720, height = 440;
  const int ml = 70, mr = 140, mt = 30, mb = 50;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  std::size_t epochs = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& a : archs) {
    const auto& s = pick_series(a, split_name);
    epochs = std::max(epochs, s.size());
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  lo = std::max(0.0, lo - 0.05 * (hi - lo));
  hi += 0.05 * (hi - lo);

  auto x_of = [&](std::size_t e) {
    return ml + (epochs > 1 ? plot_w * static_cast<double>(e) / (epochs - 1) : 0.0);
  };
  auto y_of = [&](double v) { return mt + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(ml) + "\" y=\"20\" font-family=\"sans-serif\" "
         "font-size=\"14\">RLE on " + split_name + " data</text>\n";

  // Axes.
  svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + fmt(mt + plot_h) +
         "\" x2=\"" + fmt(ml + plot_w) + "\" y2=\"" + fmt(mt + plot_h) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(mt) +
         "\" x2=\"" + std::to_string(ml) + "\" y2=\"" + fmt(mt + plot_h) +
         "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    svg += "<text x=\"8\" y=\"" + fmt(y_of(v) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(v) + "</text>\n";
    svg += "<line x1=\"" + std::to_string(ml - 4) + "\" y1=\"" + fmt(y_of(v)) +
           "\" x2=\"" + std::to_string(ml) + "\" y2=\"" + fmt(y_of(v)) +
           "\" stroke=\"black\"/>\n";
  }
  svg += "<text x=\"" + fmt(ml + plot_w / 2) + "\" y=\"" +
         std::to_string(height - 14) +
         "\" font-family=\"sans-serif\" font-size=\"12\">epoch</text>\n";
  svg += "<text x=\"" + std::to_string(ml) + "\" y=\"" + fmt(mt + plot_h + 16) +
         "\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
  svg += "<text x=\"" + fmt(ml + plot_w - 10) + "\" y=\"" + fmt(mt + plot_h + 16) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" +
         std::to_string(epochs - 1) + "</text>\n";

  int legend_row = 0;
  for (const auto& a : archs) {
    const auto& series = pick_series(a, split_name);
    std::string points;
    for (std::size_t e = 0; e < series.size(); ++e) {
      points += fmt(x_of(e), 6);
      points += ',';
      points += fmt(y_of(series[e]), 6);
      points += ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(arch_color(a.name)) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = mt + 16 + 20 * legend_row++;
    svg += "<line x1=\"" + fmt(ml + plot_w + 12) + "\" y1=\"" + fmt(ly) +
           "\" x2=\"" + fmt(ml + plot_w + 36) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + arch_color(a.name) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(ml + plot_w + 42) + "\" y=\"" + fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + a.name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string frame_svg(const MetricFrame& frame, double lo, double hi) {
  if (frame.k * frame.k != static_cast<int>(frame.cells.size()))
    throw DataError("frame_svg: cell count != k^2");
  const int cell = 32, pad = 2;
  const int size = frame.k * cell + 2 * pad;
  const double span = hi > lo ? hi - lo : 1.0;

  // Linear ramp, dark blue (lo) to yellow (hi).
  auto color = [&](double v) {
    double t = (v - lo) / span;
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(11 + t * (255 - 11)));
    const int g = static_cast<int>(std::lround(29 + t * (210 - 29)));
    const int b = static_cast<int>(std::lround(81 + t * (63 - 81)));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(size) + "\" height=\"" + std::to_string(size) + "\">\n";
  for (int row = 0; row < frame.k; ++row)
    for (int col = 0; col < frame.k; ++col) {
      svg += "<rect x=\"" + std::to_string(pad + col * cell) + "\" y=\"" +
             std::to_string(pad + row * cell) + "\" width=\"" +
             std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
             "\" fill=\"" + color(frame.at(row, col)) +
             "\" stroke=\"#222\" stroke-width=\"0.5\"/>\n";
    }
  svg += "</svg>\n";
  return svg;
}

void emit_plots(const ExperimentReport& report,
                const std::filesystem::path& out_dir) {
  if (report.archs.empty() || report.archs.front().train_rle.empty())
    throw DataError("emit_plots: empty report");
  for (const auto& a : report.archs)
    write_text_file(out_dir / ("curves_" + a.name + ".csv"), curves_csv(a));
  for (const char* split : {"train", "val", "test"})
    write_text_file(out_dir / ("curves_" + std::string(split) + ".svg"),
                    curves_svg(report.archs, split));
}

}  // namespace gridcast
