#include "skm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace skm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_unsigned(const std::string& text, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("invalid integer '" + text + "'", line);
  }
  return value;
}

double parse_field(const std::string& text, std::size_t line) {
  try {
    return parse_double(text);
  } catch (const std::invalid_argument&) {
    throw ParseError("invalid number '" + text + "'", line);
  }
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string short_number(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

/// Maps data values to pixels along one axis, optionally in log10.
struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  void fit(const std::vector<double>& values) {
    if (values.empty()) return;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
    if (log) {
      lo = std::floor(lo);
      hi = std::ceil(hi);
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }

  double fraction(double v) const { return (transform(v) - lo) / (hi - lo); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8.0)));
      for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += step) out.push_back(std::pow(10.0, e));
    } else {
      for (int k = 0; k <= 5; ++k) out.push_back(lo + (hi - lo) * k / 5.0);
    }
    return out;
  }
};

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.beta << ',' << format_double(r.lambda) << ',' << r.trial << ',' << r.seed << ',' << r.iterations << ','
        << format_double(r.wall_seconds) << ',' << format_double(r.final_residual) << ','
        << to_string(r.halted_reason) << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) throw ParseError("unexpected header", line_no);
  std::vector<SweepRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw ParseError("expected 8 fields", line_no);
    SweepRecord r;
    r.beta = parse_unsigned<std::size_t>(f[0], line_no);
    r.lambda = parse_field(f[1], line_no);
    r.trial = parse_unsigned<std::size_t>(f[2], line_no);
    r.seed = parse_unsigned<std::uint64_t>(f[3], line_no);
    r.iterations = parse_unsigned<std::size_t>(f[4], line_no);
    r.wall_seconds = parse_field(f[5], line_no);
    r.final_residual = parse_field(f[6], line_no);
    const auto reason = parse_halt_reason(f[7]);
    if (!reason) throw ParseError("unknown halt reason '" + f[7] + "'", line_no);
    r.halted_reason = *reason;
    records.push_back(r);
  }
  return records;
}

void write_aggregate_csv(std::ostream& out, const std::vector<CellAggregate>& aggregates) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& a : aggregates) {
    out << a.beta << ',' << format_double(a.lambda) << ',' << a.trials << ',' << format_double(a.wall_seconds.median)
        << ',' << format_double(a.wall_seconds.mean) << ',' << format_double(a.wall_seconds.stddev) << ','
        << format_double(a.iterations.median) << ',' << format_double(a.iterations.mean) << ','
        << format_double(a.iterations.stddev) << ',' << format_double(a.final_residual.median) << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << kComparisonCsvHeader << '\n';
  for (const auto& r : table.records) {
    out << to_string(r.method) << ',' << r.parameter << ',' << format_double(r.lambda) << ',' << r.trial << ','
        << r.seed << ',' << r.iterations << ',' << format_double(r.wall_seconds) << ','
        << format_double(r.final_residual) << ',' << to_string(r.halted_reason) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_double(r.residual_norm) << ',' << format_double(r.max_violation) << ',';
    if (r.satisfied) out << *r.satisfied;
    out << ',' << format_double(r.elapsed_seconds) << '\n';
  }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.records.empty()) throw std::invalid_argument("emit_csv: empty result");
  std::ofstream out = open_for_writing(path);
  write_sweep_csv(out, result.records);
  finish(out, path);
}

void write_svg(std::ostream& out, const Chart& chart) {
  constexpr double kWidth = 720, kHeight = 480;
  constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  Axis xa{chart.log_x}, ya{chart.log_y};
  std::vector<double> xs, ys;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (!xa.accepts(x) || !ya.accepts(y)) continue;
      xs.push_back(xa.transform(x));
      ys.push_back(ya.transform(y));
    }
  }
  xa.fit(xs);
  ya.fit(ys);
  const auto px = [&](double x) { return kLeft + xa.fraction(x) * plot_w; };
  const auto py = [&](double y) { return kTop + (1.0 - ya.fraction(y)) * plot_h; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(chart.title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (const double t : xa.ticks()) {
    const double x = px(t);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"black\"/>\n<text x=\"" << x << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\">" << short_number(t) << "</text>\n";
  }
  for (const double t : ya.ticks()) {
    const double y = py(t);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\"/>\n<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
        << short_number(t) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(chart.x_label) << "</text>\n"
      << "<text transform=\"translate(18," << kTop + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(chart.y_label) << "</text>\n";

  std::size_t colour = 0;
  for (const auto& s : chart.series) {
    const char* stroke = kPalette[colour++ % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) {
      if (xa.accepts(x) && ya.accepts(y)) out << px(x) << ',' << py(y) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(colour - 1);
    out << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + plot_w + 32
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n<text x=\""
        << kLeft + plot_w + 38 << "\" y=\"" << ly << "\">" << escape_xml(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) {
  if (result.aggregates.empty()) throw std::invalid_argument("emit_plot: empty result");
  Chart chart{"Median time to threshold", "beta", "seconds", false, true, {}};
  for (const auto& a : result.aggregates) {
    const std::string name = "lambda=" + short_number(a.lambda);
    auto it = std::find_if(chart.series.begin(), chart.series.end(), [&](const auto& s) { return s.name == name; });
    if (it == chart.series.end()) it = chart.series.insert(chart.series.end(), ChartSeries{name, {}});
    it->points.emplace_back(static_cast<double>(a.beta), a.wall_seconds.median);
  }
  for (auto& s : chart.series) std::sort(s.points.begin(), s.points.end());
  std::ofstream out = open_for_writing(path);
  write_svg(out, chart);
  finish(out, path);
}

void emit_plot(const std::vector<ResidualCurve>& curves, const std::filesystem::path& path) {
  if (curves.empty()) throw std::invalid_argument("emit_plot: no curves");
  Chart chart{"Residual norm", "iteration", "residual", false, true, {}};
  for (const auto& c : curves) {
    chart.series.push_back(
        {"beta=" + std::to_string(c.config.beta) + " lambda=" + short_number(c.config.lambda), c.by_iteration()});
  }
  std::ofstream out = open_for_writing(path);
  write_svg(out, chart);
  finish(out, path);
}

}  // namespace skm
