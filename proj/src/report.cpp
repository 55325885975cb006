#include "tailwise/report.hpp"

#include "tailwise/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace tailwise {

namespace {

PlotSeries make_series(std::string name, Scale scale, Style style,
                       std::vector<Point> points = {}) {
  PlotSeries s;
  s.name = std::move(name);
  s.scale = scale;
  s.style = style;
  s.points = std::move(points);
  return s;
}

} // namespace

std::vector<PlotSeries> ccdf_figure(const Sample& s, const TailFit& fit,
                                    std::size_t max_points) {
  const auto pts = empirical_ccdf(s);
  auto emp = make_series("empirical CCDF", Scale::loglog, Style::points);
  const double lx_range = std::log10(pts.back().x / pts.front().x);
  const double ly_range = std::log10(pts.front().fraction / pts.back().fraction);
  const double step = 1.0 / static_cast<double>(std::max<std::size_t>(max_points, 2) / 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (!emp.points.empty() && i + 1 < pts.size()) {
      const auto& last = emp.points.back();
      const double dx = lx_range > 0 ? std::log10(p.x / last.x) / lx_range : 0.0;
      const double dy = ly_range > 0 ? std::log10(last.y / p.fraction) / ly_range : 0.0;
      if (dx < step && dy < step)
        continue;
    }
    emp.points.push_back({p.x, p.fraction});
  }

  const double slope = -(fit.alpha - 1.0);
  const double anchor = static_cast<double>(fit.n_tail) / static_cast<double>(s.size());
  const double x_end = s.max() > fit.xmin ? s.max() : 10.0 * fit.xmin;
  auto line = make_series(
    fmt::format("power-law fit (alpha {:.2f})", fit.alpha), Scale::loglog, Style::line,
    {{fit.xmin, anchor}, {x_end, anchor * std::pow(x_end / fit.xmin, slope)}});
  line.fitted = FittedLine{slope, std::log10(anchor) - slope * std::log10(fit.xmin)};
  line.xmin_marker = fit.xmin;

  auto marker = make_series(fmt::format("xmin = {:g}", fit.xmin), Scale::loglog, Style::line,
                            {{fit.xmin, pts.back().fraction}, {fit.xmin, 1.0}});
  marker.xmin_marker = fit.xmin;
  return {std::move(emp), std::move(line), std::move(marker)};
}

AlphaPanel alpha_panel(const std::map<PlatformYear, TailFit>& fits) {
  if (fits.empty())
    throw EmptySample("alpha panel needs at least one fit");
  AlphaPanel panel;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [key, fit] : fits) {
    panel.by_year.push_back({key.first, key.second, fit.alpha});
    auto& a = acc[key.first];
    a.first += fit.alpha;
    ++a.second;
  }
  for (const auto& [platform, a] : acc)
    panel.by_platform.push_back({platform, a.first / static_cast<double>(a.second), a.second});
  std::stable_sort(panel.by_platform.begin(), panel.by_platform.end(),
                   [](const auto& l, const auto& r) { return l.mean_alpha < r.mean_alpha; });
  return panel;
}

std::vector<PlotSeries> alpha_series(const AlphaPanel& panel) {
  std::vector<PlotSeries> out;
  for (const auto& row : panel.by_year) {
    if (out.empty() || out.back().name != row.platform)
      out.push_back(make_series(row.platform, Scale::linear, Style::line));
    out.back().points.push_back({static_cast<double>(row.year), row.alpha});
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]])
      ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DomainError("spearman needs vectors of equal length");
  if (x.size() < 2)
    throw SampleTooSmall("spearman needs at least two pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i)
    d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const auto n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

MedianAlpha median_vs_alpha(const std::vector<PlatformStats>& stats,
                            const std::map<std::string, TailFit>& fits) {
  MedianAlpha out;
  for (const auto& st : stats) {
    auto it = fits.find(st.platform);
    if (it != fits.end())
      out.rows.push_back({st.platform, st.median, it->second.alpha});
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const auto& a, const auto& b) { return a.platform < b.platform; });
  if (out.rows.size() >= 3) {
    std::vector<double> med;
    std::vector<double> alpha;
    for (const auto& r : out.rows) {
      med.push_back(r.median);
      alpha.push_back(r.alpha);
    }
    out.spearman = spearman(med, alpha);
  }
  return out;
}

PlotSeries median_alpha_series(const MedianAlpha& m) {
  auto s = make_series("platforms", Scale::linear, Style::points);
  for (const auto& r : m.rows) {
    s.points.push_back({r.alpha, r.median});
    s.labels.push_back(r.platform);
  }
  return s;
}

PlotSeries proportion_figure(const std::map<std::string, TailFit>& fits) {
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& [platform, fit] : fits) {
    if (fit.n == 0 || fit.n_tail > fit.n)
      throw DomainError("fit for " + platform + " has an inconsistent tail count");
    rows.emplace_back(platform, static_cast<double>(fit.n_tail) / static_cast<double>(fit.n));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  auto s = make_series("power-law proportion", Scale::linear, Style::bars);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.points.push_back({static_cast<double>(i + 1), rows[i].second});
    s.labels.push_back(rows[i].first);
  }
  return s;
}

CategoryPanel category_panel(const std::map<std::string, TailFit>& fits) {
  if (fits.empty())
    throw EmptySample("category panel needs at least one fit");
  CategoryPanel panel{};
  long double sum = 0.0L;
  long double wsum = 0.0L;
  long double weights = 0.0L;
  for (const auto& [category, fit] : fits) {
    panel.rows.push_back({category, fit.alpha, fit.n});
    sum += fit.alpha;
    wsum += static_cast<long double>(fit.alpha) * static_cast<long double>(fit.n);
    weights += static_cast<long double>(fit.n);
  }
  std::stable_sort(panel.rows.begin(), panel.rows.end(),
                   [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  panel.simple_mean = static_cast<double>(sum / static_cast<long double>(fits.size()));
  if (!(weights > 0.0L))
    throw DomainError("category fits carry no observations");
  panel.weighted_mean = static_cast<double>(wsum / weights);
  return panel;
}

PlotSeries category_series(const CategoryPanel& panel) {
  auto s = make_series("alpha by category", Scale::linear, Style::bars);
  for (std::size_t i = 0; i < panel.rows.size(); ++i) {
    s.points.push_back({static_cast<double>(i + 1), panel.rows[i].alpha});
    s.labels.push_back(panel.rows[i].category);
  }
  return s;
}

namespace {

constexpr std::array<std::string_view, 10> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                   "#bcbd22", "#17becf"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  const std::string s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

// Label of the tick at 10^k.
std::string decade_label(int k) {
  if (k >= 0 && k <= 6)
    return "1" + std::string(static_cast<std::size_t>(k), '0');
  if (k < 0 && k >= -4)
    return "0." + std::string(static_cast<std::size_t>(-k - 1), '0') + "1";
  return fmt::format("1e{}", k);
}

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (raw <= m * mag)
      return m * mag;
  }
  return 10.0 * mag;
}

struct Axis {
  double lo;
  double hi;
  bool log;
  std::vector<std::pair<double, std::string>> ticks; // in transformed units
  double map(double v) const {
    return log ? std::log10(v) : v;
  }
};

Axis log_axis(double min, double max) {
  Axis a{std::floor(std::log10(min)), std::ceil(std::log10(max)), true, {}};
  if (a.hi <= a.lo)
    a.hi = a.lo + 1.0;
  for (int k = static_cast<int>(a.lo); k <= static_cast<int>(a.hi); ++k)
    a.ticks.emplace_back(static_cast<double>(k), decade_label(k));
  return a;
}

Axis linear_axis(double min, double max, bool from_zero) {
  if (from_zero)
    min = std::min(min, 0.0);
  if (max <= min) {
    const double pad = min == 0.0 ? 1.0 : std::abs(min) * 0.5;
    min -= pad;
    max += pad;
  }
  const double step = nice_step(max - min);
  Axis a{std::floor(min / step) * step, std::ceil(max / step) * step, false, {}};
  for (double t = a.lo; t <= a.hi + step * 1e-9; t += step) {
    const double snapped = std::round(t / step) * step;
    a.ticks.emplace_back(snapped, fmt::format("{:g}", snapped == 0.0 ? 0.0 : snapped));
  }
  return a;
}

} // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const SvgOptions& opts) {
  if (series.empty())
    throw RenderError("nothing to render: empty series set");
  const Scale scale = series.front().scale;
  bool bars = false;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  std::size_t n_bars = 0;
  for (const auto& s : series) {
    if (s.scale != scale)
      throw RenderError("series '" + s.name + "' uses a different scale");
    if (s.style == Style::bars) {
      if (scale == Scale::loglog)
        throw RenderError("bar series '" + s.name + "' needs a linear scale");
      bars = true;
      n_bars = std::max(n_bars, s.points.size());
    }
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw RenderError("series '" + s.name + "' has a non-finite point");
      if (scale == Scale::loglog && (p.x <= 0.0 || p.y <= 0.0))
        throw RenderError("series '" + s.name + "' has a nonpositive point on log axes");
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (!(xmin <= xmax))
    throw RenderError("nothing to render: all series are empty");

  Axis ax = scale == Scale::loglog ? log_axis(xmin, xmax) : linear_axis(xmin, xmax, false);
  Axis ay = scale == Scale::loglog ? log_axis(ymin, ymax) : linear_axis(ymin, ymax, bars);
  if (bars) {
    ax = Axis{0.5, static_cast<double>(n_bars) + 0.5, false, {}};
  }

  const double left = 70.0;
  const double right = 230.0;
  const double top = opts.title.empty() ? 20.0 : 40.0;
  const double bottom = bars ? 80.0 : 50.0;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;
  auto px = [&](double v) { return left + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return top + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };
  auto tx = [&](double t) { return left + (t - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto ty = [&](double t) { return top + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                   "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
                   opts.width, opts.height, opts.width, opts.height);
  o += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
                   opts.width, opts.height);
  if (!opts.title.empty())
    o += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     coord(left + pw / 2), xml_escape(opts.title));

  // Frame and ticks.
  o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                   "stroke=\"black\"/>\n",
                   coord(left), coord(top), coord(pw), coord(ph));
  o += "<g class=\"x-ticks\">\n";
  for (const auto& [t, label] : ax.ticks) {
    const double x = tx(t);
    o += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>"
                     "<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
                     coord(x), coord(top + ph), coord(top + ph + 5), coord(top + ph + 18),
                     xml_escape(label));
  }
  o += "</g>\n<g class=\"y-ticks\">\n";
  for (const auto& [t, label] : ay.ticks) {
    const double y = ty(t);
    o += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>"
                     "<text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>\n",
                     coord(left - 5), coord(y), coord(left), coord(left - 8), coord(y + 4),
                     xml_escape(label));
  }
  o += "</g>\n";
  if (!opts.x_label.empty())
    o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     coord(left + pw / 2), coord(opts.height - 8.0), xml_escape(opts.x_label));
  if (!opts.y_label.empty())
    o += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                     coord(top + ph / 2), xml_escape(opts.y_label));

  // Data.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const auto color = palette[i % palette.size()];
    o += fmt::format("<g class=\"series\" data-name=\"{}\">\n", xml_escape(s.name));
    switch (s.style) {
      case Style::line: {
        if (s.points.empty())
          break;
        o += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"",
                         color);
        for (std::size_t k = 0; k < s.points.size(); ++k)
          o += fmt::format("{}{},{}", k ? " " : "", coord(px(s.points[k].x)),
                           coord(py(s.points[k].y)));
        o += "\"/>\n";
        break;
      }
      case Style::points:
        for (const auto& p : s.points)
          o += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\"/>\n",
                           coord(px(p.x)), coord(py(p.y)), color);
        break;
      case Style::bars: {
        const double w = pw / static_cast<double>(n_bars) * 0.7;
        const double base = py(std::max(ay.lo, 0.0));
        for (const auto& p : s.points) {
          const double y = py(p.y);
          o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                           coord(px(p.x) - w / 2), coord(std::min(y, base)), coord(w),
                           coord(std::abs(base - y)), color);
        }
        break;
      }
    }
    if (!s.labels.empty()) {
      for (std::size_t k = 0; k < s.points.size() && k < s.labels.size(); ++k) {
        const auto& p = s.points[k];
        if (s.style == Style::bars)
          o += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                           coord(px(p.x)), coord(top + ph + 18), xml_escape(s.labels[k]));
        else
          o += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", coord(px(p.x) + 4),
                           coord(py(p.y) - 4), xml_escape(s.labels[k]));
      }
    }
    o += "</g>\n";
  }

  // Legend.
  o += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10.0 + 18.0 * static_cast<double>(i);
    const double x = left + pw + 12.0;
    o += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
                     "<text x=\"{}\" y=\"{}\">{}</text>\n",
                     coord(x), coord(y - 9), palette[i % palette.size()], coord(x + 15),
                     coord(y), xml_escape(series[i].name));
  }
  o += "</g>\n</svg>\n";
  return o;
}

void write_series_csv(std::ostream& out, const PlotSeries& s) {
  const bool labeled = !s.labels.empty();
  out << (labeled ? "label,x,y\n" : "x,y\n");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (labeled)
      out << (i < s.labels.size() ? s.labels[i] : "") << ',';
    out << fmt::format("{},{}\n", s.points[i].x, s.points[i].y);
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  return fmt::format("{:016x}", v);
}

} // namespace tailwise
