#include "tailwise_cli.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace tailwise::cli {

namespace {

class OutputDir {
public:
  OutputDir(std::filesystem::path root, PipelineResult& result)
    : root_(std::move(root)), result_(result) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec)
      throw IoError("cannot create " + root_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& bytes) {
    const auto path = root_ / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << bytes;
    if (!f)
      throw IoError("cannot write " + path.string());
    result_.outputs.push_back(name);
  }

private:
  std::filesystem::path root_;
  PipelineResult& result_;
};

std::string table_text(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  write_table(os, header, rows);
  return os.str();
}

std::string series_text(const PlotSeries& s) {
  std::ostringstream os;
  write_series_csv(os, s);
  return os.str();
}

std::string json_text(const json& j) {
  return j.dump(2) + "\n";
}

std::string num(double v) {
  return fmt::format("{}", v);
}

} // namespace

PipelineResult run_pipeline(const PipelineOptions& opts, std::ostream& err) {
  PipelineResult result;
  auto warn = [&](std::string msg) {
    err << "warning: " << msg << '\n';
    result.warnings.push_back(std::move(msg));
  };
  FitOptions fit_opts;
  fit_opts.min_tail = opts.min_tail;
  fit_opts.validate();
  if (opts.bootstrap != 0 && opts.bootstrap < 100)
    throw ConfigError("--bootstrap needs at least 100 replicates (or 0 to skip)");

  auto parsed = parse_csv(opts.input);
  std::sort(parsed.records.begin(), parsed.records.end(), canonical_less);
  OutputDir out(opts.out_dir, result);
  std::ostringstream diag;
  for (const auto& d : parsed.rejected)
    diag << "line " << d.line << ": rejected: " << d.message << '\n';
  if (!parsed.rejected.empty())
    warn(fmt::format("{} malformed rows skipped", parsed.rejected.size()));

  // Imputation.
  auto records = std::move(parsed.records);
  const bool any_missing = std::any_of(records.begin(), records.end(),
                                       [](const auto& r) { return !r.earnings; });
  json imputation = json{{"missing", 0}};
  if (any_missing) {
    const auto model = fit_imputation(records);
    records = impute_earnings(std::move(records), model);
    std::size_t imputed = 0;
    for (const auto& r : records) {
      if (!r.imputed)
        continue;
      ++imputed;
      if (r.unseen_level)
        diag << "creator " << r.creator_id << " (" << r.year << ", " << r.category
             << "): imputed with reference level for an unseen category or year\n";
    }
    imputation = to_json(model);
    imputation["missing"] = imputed;
  }
  out.write("imputation.json", json_text(imputation));

  auto floored = filter_floor(std::move(records), opts.floor);
  auto seg = segment_single_platform(floored.kept);
  diag << "records kept after floor: " << floored.kept.size() << '\n'
       << "records dropped by floor: " << floored.dropped << '\n'
       << "multi-platform records discarded: " << seg.multi_platform_discarded << '\n';
  if (seg.buckets.empty())
    warn("every bucket is empty after segmentation");

  // Table 1 and Table 2.
  std::vector<PlatformStats> stats;
  std::map<std::string, Sample> samples;
  for (const auto& [name, recs] : seg.buckets) {
    samples.emplace(name, earnings_sample(recs));
    stats.push_back(summary_stats(samples.at(name), name));
  }
  {
    std::vector<std::vector<std::string>> rows;
    json raw = json::array();
    for (const auto& st : stats) {
      rows.push_back(table1_row(st));
      raw.push_back(to_json(st));
    }
    out.write("table1.csv", table_text(table1_header(), rows));
    out.write("table1.json", json_text(raw));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : nsfw_breakdown(seg))
      rows.push_back(table2_row(r));
    out.write("table2.csv", table_text(table2_header(), rows));
  }

  auto try_fit = [&](const Sample& s, const std::string& label) -> std::optional<TailFit> {
    try {
      return select_xmin(s, fit_opts);
    } catch (const SampleTooSmall& e) {
      warn(label + ": not fitted: " + e.what());
    } catch (const DegenerateTail& e) {
      warn(label + ": not fitted: " + e.what());
    }
    return std::nullopt;
  };

  // Pooled per-platform fits.
  std::map<std::string, TailFit> pooled;
  json fits_json = json::object();
  json pooled_json = json::object();
  std::size_t bucket_index = 0;
  for (const auto& [name, s] : samples) {
    const auto fit = try_fit(s, name);
    ++bucket_index;
    if (!fit)
      continue;
    pooled.emplace(name, *fit);
    json j = to_json(*fit);
    if (opts.bootstrap > 0)
      j["gof"] = to_json(gof_pvalue(s, *fit, opts.bootstrap,
                                    derive_seed(opts.seed, bucket_index), fit_opts));
    result.fit_digests[name] = hex64(fnv1a64(j.dump()));
    out.write("fits/fit_" + name + ".json", json_text(j));
    pooled_json[name] = std::move(j);
  }
  fits_json["pooled"] = pooled_json;

  // Per platform-year fits.
  std::map<PlatformYear, TailFit> yearly;
  json yearly_json = json::array();
  for (const auto& [name, recs] : seg.buckets) {
    std::map<int, std::vector<EarningsRecord>> by_year;
    for (const auto& r : recs)
      by_year[r.year].push_back(r);
    for (const auto& [year, group] : by_year) {
      const auto label = fmt::format("{} {}", name, year);
      const auto fit = try_fit(earnings_sample(group), label);
      if (!fit)
        continue;
      yearly.emplace(PlatformYear{name, year}, *fit);
      json j = to_json(*fit);
      result.fit_digests[label] = hex64(fnv1a64(j.dump()));
      j["platform"] = name;
      j["year"] = year;
      yearly_json.push_back(std::move(j));
    }
  }
  fits_json["by_year"] = yearly_json;

  // Per-category fits over every record above the floor.
  std::map<std::string, TailFit> by_category;
  json category_json = json::object();
  {
    std::map<std::string, std::vector<EarningsRecord>> groups;
    for (const auto& r : floored.kept)
      groups[r.category].push_back(r);
    for (const auto& [cat, group] : groups) {
      const auto fit = try_fit(earnings_sample(group), "category " + cat);
      if (!fit)
        continue;
      by_category.emplace(cat, *fit);
      json j = to_json(*fit);
      result.fit_digests["category " + cat] = hex64(fnv1a64(j.dump()));
      category_json[cat] = std::move(j);
    }
  }
  fits_json["by_category"] = category_json;
  out.write("fits.json", json_text(fits_json));

  // Figure 1: CCDF with fitted line per platform.
  for (const auto& [name, fit] : pooled) {
    const auto series = ccdf_figure(samples.at(name), fit);
    out.write("fig1_ccdf_" + name + ".csv", series_text(series.front()));
    SvgOptions so;
    so.title = display_name(name) + ": earnings CCDF";
    so.x_label = "monthly earnings (USD)";
    so.y_label = "P(X >= x)";
    out.write("fig1_ccdf_" + name + ".svg", render_svg(series, so));
  }

  // Figure 2: alpha by platform and by year.
  if (!yearly.empty()) {
    const auto panel = alpha_panel(yearly);
    std::vector<std::vector<std::string>> rows_a;
    for (const auto& r : panel.by_platform) {
      auto it = pooled.find(r.platform);
      rows_a.push_back({r.platform, num(r.mean_alpha), std::to_string(r.n_years),
                        it == pooled.end() ? "" : num(it->second.alpha)});
    }
    out.write("fig2_alpha_by_platform.csv",
              table_text({"platform", "mean_alpha_over_years", "n_years", "pooled_sample_alpha"},
                         rows_a));
    std::vector<std::vector<std::string>> rows_b;
    for (const auto& r : panel.by_year)
      rows_b.push_back({r.platform, std::to_string(r.year), num(r.alpha)});
    out.write("fig2_alpha_by_year.csv", table_text({"platform", "year", "alpha"}, rows_b));
    SvgOptions so;
    so.title = "alpha by platform and year";
    so.x_label = "year";
    so.y_label = "alpha";
    out.write("fig2_alpha.svg", render_svg(alpha_series(panel), so));
  } else {
    warn("no platform-year fits; figure 2 skipped");
  }

  // Figure 3: median against alpha.
  if (!pooled.empty()) {
    const auto m = median_vs_alpha(stats, pooled);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : m.rows)
      rows.push_back({r.platform, num(r.median), num(r.alpha)});
    out.write("fig3_median_alpha.csv", table_text({"platform", "median", "alpha"}, rows));
    out.write("fig3_spearman.json",
              json_text(json{{"n_platforms", m.rows.size()},
                             {"spearman", m.spearman ? json(*m.spearman) : json(nullptr)}}));
    SvgOptions so;
    so.title = "median earnings against alpha";
    so.x_label = "alpha";
    so.y_label = "median (USD)";
    out.write("fig3_median_alpha.svg", render_svg({median_alpha_series(m)}, so));

    // Figure 4: share of each platform in its power-law tail.
    const auto prop = proportion_figure(pooled);
    out.write("fig4_proportion.csv", series_text(prop));
    so.title = "share of observations at or above xmin";
    so.x_label = "platform";
    so.y_label = "proportion";
    out.write("fig4_proportion.svg", render_svg({prop}, so));
  } else {
    warn("no pooled platform fits; figures 1, 3 and 4 skipped");
  }

  // Figure 5: alpha by content category.
  if (!by_category.empty()) {
    const auto panel = category_panel(by_category);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : panel.rows)
      rows.push_back({r.category, num(r.alpha), std::to_string(r.n_obs)});
    rows.push_back({"simple average", num(panel.simple_mean), ""});
    rows.push_back({"weighted average", num(panel.weighted_mean), ""});
    out.write("fig5_category.csv", table_text({"category", "alpha", "n_obs"}, rows));
    SvgOptions so;
    so.title = "alpha by content category";
    so.x_label = "category";
    so.y_label = "alpha";
    out.write("fig5_category.svg", render_svg({category_series(panel)}, so));
  } else {
    warn("no category fits; figure 5 skipped");
  }

  for (const auto& w : result.warnings)
    diag << "warning: " << w << '\n';
  out.write("diagnostics.txt", diag.str());
  return result;
}

} // namespace tailwise::cli
