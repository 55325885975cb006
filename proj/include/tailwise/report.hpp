#pragma once

#include "tailwise/cns_fit.hpp"
#include "tailwise/earnings.hpp"
#include "tailwise/powerlaw.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tailwise {

enum class Scale { linear, loglog };
enum class Style { line, points, bars };

struct Point {
  double x;
  double y;
};

/// log10(y) = intercept + slope * log10(x).
struct FittedLine {
  double slope;
  double intercept;
};

struct PlotSeries {
  std::string name;
  std::vector<Point> points;
  Scale scale = Scale::loglog;
  Style style = Style::line;
  std::optional<double> xmin_marker;
  std::optional<FittedLine> fitted;
  /// Category labels for bar series, one per point.
  std::vector<std::string> labels;
};

/// Empirical CCDF points (thinned to at most about max_points on the log
/// scale), the fitted power-law line anchored at (xmin, n_tail / n) with
/// log-log slope -(alpha - 1), and a vertical xmin marker.
std::vector<PlotSeries> ccdf_figure(const Sample& s, const TailFit& fit,
                                    std::size_t max_points = 2000);

using PlatformYear = std::pair<std::string, int>;

struct AlphaPanel {
  struct PlatformRow {
    std::string platform;
    double mean_alpha; ///< average of the per-year alphas
    std::size_t n_years;
  };
  struct YearRow {
    std::string platform;
    int year;
    double alpha;
  };
  std::vector<PlatformRow> by_platform; ///< ascending by mean_alpha
  std::vector<YearRow> by_year;         ///< by platform, then year
};

/// Table A averages the per-year fits of each platform; table B lists them.
/// Throws EmptySample on an empty map.
AlphaPanel alpha_panel(const std::map<PlatformYear, TailFit>& fits);

/// One linear series per platform: alpha against year.
std::vector<PlotSeries> alpha_series(const AlphaPanel& panel);

/// Ranks 1..n with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> v);

/// Spearman correlation 1 - 6 sum(d^2) / (n (n^2 - 1)) on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct MedianAlpha {
  struct Row {
    std::string platform;
    double median;
    double alpha;
  };
  std::vector<Row> rows; ///< platforms present in both inputs, by name
  /// Omitted with fewer than 3 platforms.
  std::optional<double> spearman;
};

MedianAlpha median_vs_alpha(const std::vector<PlatformStats>& stats,
                            const std::map<std::string, TailFit>& fits);

PlotSeries median_alpha_series(const MedianAlpha& m);

/// Bars of n_tail / n per platform, sorted by descending proportion.
PlotSeries proportion_figure(const std::map<std::string, TailFit>& fits);

struct CategoryPanel {
  struct Row {
    std::string category;
    double alpha;
    std::size_t n_obs;
  };
  std::vector<Row> rows; ///< ascending by alpha
  double simple_mean;
  /// Weighted by the number of observations behind each fit.
  double weighted_mean;
};

/// Throws EmptySample on an empty map.
CategoryPanel category_panel(const std::map<std::string, TailFit>& fits);

PlotSeries category_series(const CategoryPanel& panel);

struct SvgOptions {
  int width = 780;
  int height = 480;
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Self-contained SVG of series sharing one scale. Log axes carry ticks at
/// powers of ten. Throws RenderError on an empty set, mixed scales, or a
/// nonpositive point in a log-log series.
std::string render_svg(const std::vector<PlotSeries>& series, const SvgOptions& opts = {});

/// Header "x,y" then one row per point.
void write_series_csv(std::ostream& out, const PlotSeries& s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

} // namespace tailwise
