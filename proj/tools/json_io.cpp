#include "tailwise_cli.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace tailwise::cli {

namespace {

json number(double v) {
  if (std::isfinite(v))
    return v;
  return nullptr;
}

json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : json(nullptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) {
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep)
    out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty())
    return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

} // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CLI::Error*>(&e))
    return exit_config;
  const auto* err = dynamic_cast<const Error*>(&e);
  if (!err)
    return exit_failure;
  switch (err->code()) {
    case ErrorCode::schema_error:
    case ErrorCode::config_error:
    case ErrorCode::kind_mismatch:
      return exit_config;
    case ErrorCode::sample_too_small:
    case ErrorCode::empty_sample:
    case ErrorCode::insufficient_grid:
      return exit_too_small;
    case ErrorCode::degenerate_tail:
      return exit_degenerate;
    default:
      return exit_failure;
  }
}

json to_json(const TailFit& fit) {
  return json{{"kind", std::string(to_string(fit.kind))},
              {"alpha", number(fit.alpha)},
              {"alpha_ccdf", number(density_to_ccdf(fit.alpha))},
              {"xmin", number(fit.xmin)},
              {"n_tail", fit.n_tail},
              {"n", fit.n},
              {"power_law_proportion",
               fit.n > 0 ? number(static_cast<double>(fit.n_tail) / static_cast<double>(fit.n))
                         : json(nullptr)},
              {"ks", number(fit.ks)},
              {"stderr", number(fit.std_error)},
              {"loglik", number(fit.loglik)}};
}

json to_json(const GofResult& gof) {
  return json{{"p_value", number(gof.p_value)},
              {"n_boot", gof.n_boot},
              {"observed_ks", number(gof.observed_ks)},
              {"seed", gof.seed},
              {"failed_replicates", gof.failed}};
}

json to_json(const PlatformStats& st) {
  return json{{"platform", st.platform}, {"obs", st.obs},
              {"mean", number(st.mean)},   {"median", number(st.median)},
              {"sd", number(st.sd)},       {"sd_undefined", st.sd_undefined},
              {"min", number(st.min)},     {"q25", number(st.q25)},
              {"q75", number(st.q75)},     {"max", number(st.max)}};
}

json to_json(const ImputationModel& m) {
  json coef = json::object();
  for (std::size_t j = 0; j < m.terms.size(); ++j)
    coef[m.terms[j]] = number(m.coefficients[j]);
  return json{{"coefficients", coef},
              {"reference_category", m.categories.empty() ? "" : m.categories.front()},
              {"reference_year", m.years.empty() ? 0 : m.years.front()},
              {"r_squared", number(m.r_squared)},
              {"n_train", m.n_train}};
}

json to_json(const TailIndexEstimate& e) {
  return json{{"method", std::string(to_string(e.method))},
              {"alpha", optional_number(e.alpha)},
              {"gamma", number(e.gamma)},
              {"k_used", e.k_used},
              {"threshold", number(e.threshold)},
              {"stderr", optional_number(e.std_error)}};
}

ColumnData read_column(const std::filesystem::path& path, const std::string& column) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  ColumnData out;
  std::string line;
  bool first = true;
  std::size_t col = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    auto cells = split(line, ',');
    if (first) {
      first = false;
      double probe = 0.0;
      const bool header = !cells.empty() && !parse_double(cells[0], probe);
      if (header) {
        std::string want = column;
        if (want.empty())
          want = std::find(cells.begin(), cells.end(), "earnings") != cells.end()
                   ? "earnings"
                   : cells[0];
        auto it = std::find(cells.begin(), cells.end(), want);
        if (it == cells.end())
          throw SchemaError("column '" + want + "' not found in " + path.string());
        col = static_cast<std::size_t>(it - cells.begin());
        continue;
      }
      if (!column.empty())
        throw SchemaError("--column given but " + path.string() + " has no header");
    }
    double v = 0.0;
    if (col < cells.size() && parse_double(cells[col], v))
      out.values.push_back(v);
    else
      ++out.skipped;
  }
  if (in.bad())
    throw IoError("read error on " + path.string());
  return out;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return fnv1a64(bytes);
}

} // namespace tailwise::cli
