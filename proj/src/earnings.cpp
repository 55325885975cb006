#include "tailwise/earnings.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/rng.hpp"

#include <Eigen/Dense>
#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

namespace tailwise {

namespace {

constexpr std::array<std::string_view, 5> platform_names{"facebook", "instagram", "twitch",
                                                         "twitter", "youtube"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  using Sep = boost::escaped_list_separator<char>;
  boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
  std::vector<std::string> out;
  for (const auto& field : tok)
    out.push_back(trim(field));
  return out;
}

struct ColumnIndex {
  std::size_t creator_id, year, platforms, category, nsfw, members, paid_members, earnings;
  std::size_t max_index;
};

ColumnIndex index_header(const std::vector<std::string>& header) {
  const auto& required = earnings_columns();
  std::array<std::size_t, 8> idx{};
  std::vector<std::string> missing;
  for (std::size_t c = 0; c < required.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), required[c]);
    if (it == header.end())
      missing.push_back(required[c]);
    else
      idx[c] = static_cast<std::size_t>(it - header.begin());
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing)
      names += (names.empty() ? "" : ", ") + m;
    throw SchemaError("missing required column(s): " + names);
  }
  return {idx[0], idx[1], idx[2], idx[3], idx[4], idx[5], idx[6], idx[7],
          *std::max_element(idx.begin(), idx.end())};
}

// Returns an error message, or an empty string on success.
std::string parse_row(const std::vector<std::string>& f, const ColumnIndex& ci,
                      EarningsRecord& r) {
  if (f.size() <= ci.max_index)
    return "expected at least " + std::to_string(ci.max_index + 1) + " fields, got "
           + std::to_string(f.size());
  r.creator_id = f[ci.creator_id];
  if (r.creator_id.empty())
    return "creator_id is empty";
  if (!parse_number(f[ci.year], r.year))
    return "year '" + f[ci.year] + "' is not an integer";

  std::set<Platform> platforms;
  std::string_view list = f[ci.platforms];
  while (!list.empty()) {
    const auto cut = list.find(';');
    const auto token = lower(trim(list.substr(0, cut)));
    list = cut == std::string_view::npos ? std::string_view{} : list.substr(cut + 1);
    if (token.empty())
      continue;
    auto p = parse_platform(token);
    if (!p)
      return "unknown platform '" + token + "'";
    platforms.insert(*p);
  }
  r.platforms.assign(platforms.begin(), platforms.end());

  r.category = f[ci.category];
  if (r.category.empty())
    return "category is empty";

  const auto nsfw = lower(f[ci.nsfw]);
  if (nsfw == "true" || nsfw == "1")
    r.nsfw = true;
  else if (nsfw == "false" || nsfw == "0")
    r.nsfw = false;
  else
    return "nsfw '" + f[ci.nsfw] + "' is not a boolean";

  if (!parse_number(f[ci.members], r.members))
    return "members '" + f[ci.members] + "' is not a nonnegative integer";
  if (!parse_number(f[ci.paid_members], r.paid_members))
    return "paid_members '" + f[ci.paid_members] + "' is not a nonnegative integer";
  if (r.paid_members > r.members)
    return "paid_members exceeds members";

  const auto& e = f[ci.earnings];
  if (!e.empty()) {
    double v = 0.0;
    if (!parse_number(e, v) || !std::isfinite(v))
      return "earnings '" + e + "' is not a number";
    if (v < 0.0)
      return "earnings is negative";
    r.earnings = v;
  }
  return {};
}

std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos)
    return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"')
      out += "\"\"";
    else
      out += c;
  }
  return out + "\"";
}

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

} // namespace

std::string_view to_string(Platform p) {
  return platform_names[static_cast<std::size_t>(p)];
}

std::optional<Platform> parse_platform(std::string_view name) {
  for (std::size_t i = 0; i < platform_names.size(); ++i) {
    if (platform_names[i] == name)
      return static_cast<Platform>(i);
  }
  return std::nullopt;
}

bool canonical_less(const EarningsRecord& a, const EarningsRecord& b) {
  auto key = [](const EarningsRecord& r) {
    return std::tie(r.creator_id, r.year, r.platforms, r.category, r.nsfw, r.members,
                    r.paid_members, r.earnings, r.imputed, r.unseen_level);
  };
  return key(a) < key(b);
}

const std::vector<std::string>& earnings_columns() {
  static const std::vector<std::string> cols{"creator_id", "year",         "platforms",
                                             "category",   "nsfw",         "members",
                                             "paid_members", "earnings"};
  return cols;
}

ParseResult parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  return parse_csv(in);
}

ParseResult parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<ColumnIndex> ci;
  ParseResult out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const boost::escaped_list_error& e) {
      if (!ci)
        throw SchemaError(std::string("unreadable header: ") + e.what());
      out.rejected.push_back({line_no, std::string("malformed quoting: ") + e.what()});
      continue;
    }
    if (!ci) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0)
        fields[0].erase(0, 3);
      ci = index_header(fields);
      continue;
    }
    EarningsRecord r;
    auto err = parse_row(fields, *ci, r);
    if (err.empty())
      out.records.push_back(std::move(r));
    else
      out.rejected.push_back({line_no, std::move(err)});
  }
  if (in.bad())
    throw IoError("read error");
  if (!ci)
    throw SchemaError("missing header row");
  return out;
}

void write_csv(std::ostream& out, const std::vector<EarningsRecord>& records) {
  const auto& cols = earnings_columns();
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const auto& r : records) {
    std::string platforms;
    for (auto p : r.platforms) {
      if (!platforms.empty())
        platforms += ';';
      platforms += to_string(p);
    }
    out << csv_cell(r.creator_id) << ',' << r.year << ',' << platforms << ','
        << csv_cell(r.category) << ',' << (r.nsfw ? "true" : "false") << ',' << r.members
        << ',' << r.paid_members << ',';
    if (r.earnings)
      out << fmt::format("{:.2f}", *r.earnings);
    out << '\n';
  }
}

namespace {

// Design row of a record under the model's encoding.
std::vector<double> design_row(const ImputationModel& m, const EarningsRecord& r,
                               bool* unseen) {
  std::vector<double> row;
  row.reserve(m.terms.size());
  row.push_back(1.0);
  row.push_back(static_cast<double>(r.paid_members));
  row.push_back(static_cast<double>(r.members));
  const auto cat = std::find(m.categories.begin(), m.categories.end(), r.category);
  for (std::size_t c = 1; c < m.categories.size(); ++c)
    row.push_back(cat - m.categories.begin() == static_cast<std::ptrdiff_t>(c) ? 1.0 : 0.0);
  if (row.size() < m.terms.size() && m.terms[row.size()] == "nsfw")
    row.push_back(r.nsfw ? 1.0 : 0.0);
  const auto yr = std::find(m.years.begin(), m.years.end(), r.year);
  for (std::size_t c = 1; c < m.years.size(); ++c)
    row.push_back(yr - m.years.begin() == static_cast<std::ptrdiff_t>(c) ? 1.0 : 0.0);
  if (unseen)
    *unseen = cat == m.categories.end() || yr == m.years.end();
  return row;
}

} // namespace

double ImputationModel::predict(const EarningsRecord& r, bool* unseen) const {
  const auto row = design_row(*this, r, unseen);
  long double y = 0.0L;
  for (std::size_t j = 0; j < row.size(); ++j)
    y += static_cast<long double>(coefficients[j]) * row[j];
  return static_cast<double>(y);
}

ImputationModel fit_imputation(const std::vector<EarningsRecord>& records) {
  std::vector<const EarningsRecord*> train;
  for (const auto& r : records) {
    if (r.earnings && !r.imputed)
      train.push_back(&r);
  }
  if (train.size() < 50)
    throw SampleTooSmall("imputation needs at least 50 records with observed earnings, got "
                         + std::to_string(train.size()));
  std::sort(train.begin(), train.end(),
            [](const auto* a, const auto* b) { return canonical_less(*a, *b); });

  ImputationModel model;
  std::set<std::string> cats;
  std::set<int> yrs;
  bool any_nsfw = false;
  bool any_sfw = false;
  for (const auto* r : train) {
    cats.insert(r->category);
    yrs.insert(r->year);
    (r->nsfw ? any_nsfw : any_sfw) = true;
  }
  model.categories.assign(cats.begin(), cats.end());
  model.years.assign(yrs.begin(), yrs.end());
  model.terms = {"intercept", "paid_members", "members"};
  for (std::size_t c = 1; c < model.categories.size(); ++c)
    model.terms.push_back("category=" + model.categories[c]);
  // A constant nsfw column would duplicate the intercept.
  if (any_nsfw && any_sfw)
    model.terms.push_back("nsfw");
  for (std::size_t c = 1; c < model.years.size(); ++c)
    model.terms.push_back("year=" + std::to_string(model.years[c]));

  const auto p = static_cast<Eigen::Index>(model.terms.size());
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd row(p);
  for (const auto* r : train) {
    const auto d = design_row(model, *r, nullptr);
    row = Eigen::Map<const Eigen::VectorXd>(d.data(), p);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
    xty += row * *r->earnings;
  }
  xtx = xtx.selfadjointView<Eigen::Lower>();
  xtx.diagonal().array() += 1e-8;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  const Eigen::VectorXd beta = ldlt.solve(xty);
  const double residual = (xtx * beta - xty).norm();
  if (ldlt.info() != Eigen::Success || !beta.allFinite()
      || residual > 1e-6 * std::max(1.0, xty.norm()))
    throw SingularDesign("imputation design is rank deficient");
  model.coefficients.assign(beta.data(), beta.data() + p);
  model.n_train = train.size();

  long double mean = 0.0L;
  for (const auto* r : train)
    mean += *r->earnings;
  mean /= static_cast<long double>(train.size());
  long double sse = 0.0L;
  long double sst = 0.0L;
  for (const auto* r : train) {
    const long double e = *r->earnings - model.predict(*r);
    const long double d = *r->earnings - mean;
    sse += e * e;
    sst += d * d;
  }
  model.r_squared = sst > 0.0L ? static_cast<double>(1.0L - sse / sst) : 0.0;
  return model;
}

std::vector<EarningsRecord> impute_earnings(std::vector<EarningsRecord> records,
                                            const ImputationModel& model) {
  for (auto& r : records) {
    if (r.earnings)
      continue;
    bool unseen = false;
    r.earnings = std::max(0.0, model.predict(r, &unseen));
    r.imputed = true;
    r.unseen_level = unseen;
  }
  return records;
}

FloorResult filter_floor(std::vector<EarningsRecord> records, const FloorOptions& opts) {
  FloorResult out;
  for (auto& r : records) {
    if (!r.earnings)
      throw DomainError("record " + r.creator_id + " has no earnings; impute first");
    const double e = *r.earnings;
    if (e > opts.floor || (opts.inclusive && e == opts.floor))
      out.kept.push_back(std::move(r));
    else
      ++out.dropped;
  }
  return out;
}

Segmentation segment_single_platform(const std::vector<EarningsRecord>& records) {
  Segmentation seg;
  for (const auto& r : records) {
    if (r.platforms.size() >= 2) {
      ++seg.multi_platform_discarded;
      continue;
    }
    const std::string bucket =
      r.platforms.empty() ? std::string(patreon_bucket) : std::string(to_string(r.platforms[0]));
    seg.buckets[bucket].push_back(r);
  }
  for (auto& [name, recs] : seg.buckets)
    std::sort(recs.begin(), recs.end(), canonical_less);
  return seg;
}

Sample earnings_sample(const std::vector<EarningsRecord>& records) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) {
    if (!r.earnings)
      throw DomainError("record " + r.creator_id + " has no earnings");
    v.push_back(*r.earnings);
  }
  return make_sample(std::move(v), Kind::continuous).sample;
}

std::map<std::string, Sample> Segmentation::samples() const {
  std::map<std::string, Sample> out;
  for (const auto& [name, recs] : buckets)
    out.emplace(name, earnings_sample(recs));
  return out;
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw EmptySample("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("quantile probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size())
    return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PlatformStats summary_stats(const Sample& s, std::string platform) {
  const auto x = s.values();
  PlatformStats st;
  st.platform = std::move(platform);
  st.obs = x.size();
  long double sum = 0.0L;
  for (double v : x)
    sum += v;
  const long double mean = sum / static_cast<long double>(x.size());
  st.mean = static_cast<double>(mean);
  if (x.size() > 1) {
    long double ss = 0.0L;
    for (double v : x)
      ss += (v - mean) * (v - mean);
    st.sd = static_cast<double>(std::sqrt(ss / static_cast<long double>(x.size() - 1)));
  } else {
    st.sd = 0.0;
    st.sd_undefined = true;
  }
  st.min = x.front();
  st.max = x.back();
  st.q25 = quantile_linear(x, 0.25);
  st.median = quantile_linear(x, 0.5);
  st.q75 = quantile_linear(x, 0.75);
  return st;
}

std::string display_name(std::string_view bucket) {
  std::string out(bucket);
  if (!out.empty())
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string format_number(double v, int decimals, bool separators) {
  std::string text = fmt::format("{:.{}f}", round_to(v, decimals), decimals);
  if (text == "-0" || text.find_first_not_of("-0.") == std::string::npos)
    text.erase(0, text[0] == '-' ? 1 : 0);
  if (!separators)
    return text;
  const std::size_t start = text[0] == '-' ? 1 : 0;
  std::size_t end = text.find('.');
  if (end == std::string::npos)
    end = text.size();
  for (std::size_t pos = end; pos > start + 3;) {
    pos -= 3;
    text.insert(pos, ",");
  }
  return text;
}

std::vector<std::string> table1_header() {
  return {"Platform", "Obs", "Mean", "Median", "SD", "Min", "Q25", "Q50", "Q75", "Max"};
}

std::vector<std::string> table1_row(const PlatformStats& st) {
  return {display_name(st.platform),
          format_number(static_cast<double>(st.obs), 0),
          format_number(st.mean, 0),
          format_number(st.median, 0),
          format_number(st.sd, 0),
          format_number(st.min, 2),
          format_number(st.q25, 1),
          format_number(st.median, 1),
          format_number(st.q75, 1),
          format_number(st.max, 0)};
}

std::vector<NsfwRow> nsfw_breakdown(const Segmentation& seg) {
  std::vector<NsfwRow> rows;
  for (const auto& [name, recs] : seg.buckets) {
    std::map<int, std::vector<const EarningsRecord*>> by_year;
    for (const auto& r : recs)
      by_year[r.year].push_back(&r);
    for (const auto& [year, group] : by_year) {
      std::vector<double> v;
      std::size_t flagged = 0;
      for (const auto* r : group) {
        if (!r->earnings)
          throw DomainError("record " + r->creator_id + " has no earnings");
        v.push_back(*r->earnings);
        flagged += r->nsfw ? 1 : 0;
      }
      std::sort(v.begin(), v.end());
      long double sum = 0.0L;
      for (double e : v)
        sum += e;
      rows.push_back({name, year, v.size(),
                      static_cast<double>(sum / static_cast<long double>(v.size())),
                      quantile_linear(v, 0.5),
                      static_cast<double>(flagged) / static_cast<double>(v.size())});
    }
  }
  return rows;
}

std::vector<std::string> table2_header() {
  return {"Platform",       "Year",           "Num_Observations",
          "Mean_Earnings", "Median_Earnings", "Sum_Is_Nsfw"};
}

std::vector<std::string> table2_row(const NsfwRow& row) {
  return {display_name(row.platform), std::to_string(row.year),
          format_number(static_cast<double>(row.obs), 0), format_number(row.mean, 0),
          format_number(row.median, 0), format_number(row.nsfw_share, 2)};
}

void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << (c ? "," : "") << csv_cell(cells[c]);
    out << '\n';
  };
  line(header);
  for (const auto& r : rows)
    line(r);
}

namespace {

struct BucketShape {
  std::string_view platform; // empty for Patreon-only
  int year;
  std::size_t obs;
  double median;
  double nsfw_share;
  double alpha;
};

// Observation counts, medians and NSFW shares of real platform-year buckets;
// alpha is the tail exponent for the platform.
constexpr std::array<BucketShape, 18> shapes{{
  {"facebook", 2018, 2870, 45, 0.25, 1.94},  {"facebook", 2021, 3068, 52, 0.18, 1.94},
  {"facebook", 2024, 2520, 44, 0.19, 1.94},  {"instagram", 2018, 414, 60, 0.46, 1.84},
  {"instagram", 2021, 14589, 69, 0.22, 1.84}, {"instagram", 2024, 20876, 53, 0.27, 1.84},
  {"", 2018, 15221, 51, 0.42, 2.24},          {"", 2021, 30768, 63, 0.36, 2.24},
  {"", 2024, 37961, 55, 0.39, 2.24},          {"twitch", 2018, 54, 41, 0.43, 1.93},
  {"twitch", 2021, 869, 48, 0.21, 1.93},      {"twitch", 2024, 870, 42, 0.21, 1.93},
  {"twitter", 2018, 7022, 60, 0.45, 2.35},    {"twitter", 2021, 16576, 77, 0.46, 2.35},
  {"twitter", 2024, 23966, 72, 0.58, 2.35},   {"youtube", 2018, 2143, 44, 0.17, 1.8},
  {"youtube", 2021, 6835, 53, 0.12, 1.8},     {"youtube", 2024, 14457, 43, 0.12, 1.8},
}};

constexpr std::array<std::string_view, 7> fixture_categories{
  "animation", "comics", "games", "music", "podcasts", "video", "writing"};

double std_normal(Rng& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Earnings above the floor: lognormal body around the bucket median with a
// Pareto tail starting at twice the median.
double draw_earnings(Rng& rng, const BucketShape& b) {
  const double tail_start = 2.0 * b.median;
  if (rng.uniform() < 0.3)
    return tail_start * std::pow(rng.uniform_open(), -1.0 / (b.alpha - 1.0));
  for (;;) {
    const double v = 0.8 * b.median * std::exp(0.8 * std_normal(rng));
    if (v > 10.005 && v < tail_start)
      return v;
  }
}

void fill_members(Rng& rng, EarningsRecord& r, double earnings) {
  const double pledge = 3.0 + 5.0 * rng.uniform();
  r.paid_members = static_cast<std::uint64_t>(std::max(1.0, std::round(earnings / pledge)));
  r.members = r.paid_members
              + static_cast<std::uint64_t>(std::round(static_cast<double>(r.paid_members)
                                                      * 2.0 * rng.uniform()));
}

} // namespace

std::vector<EarningsRecord> generate_fixture(const FixtureOptions& opts) {
  if (!(opts.scale > 0.0 && opts.scale <= 1.0))
    throw ConfigError("fixture scale must lie in (0, 1]");
  for (double share : {opts.missing_share, opts.multi_platform_share, opts.below_floor_share}) {
    if (!(share >= 0.0 && share < 1.0))
      throw ConfigError("fixture shares must lie in [0, 1)");
  }
  Rng rng{opts.seed};
  std::vector<EarningsRecord> out;
  auto new_record = [&](const BucketShape& b) {
    EarningsRecord r;
    r.creator_id = fmt::format("c{:06d}", out.size() + 1);
    r.year = b.year;
    if (auto p = parse_platform(b.platform))
      r.platforms = {*p};
    r.category = std::string(fixture_categories[rng.below(fixture_categories.size())]);
    r.nsfw = rng.uniform() < b.nsfw_share;
    return r;
  };
  auto finish = [&](EarningsRecord r, double earnings) {
    earnings = round_to(earnings, 2);
    fill_members(rng, r, earnings);
    if (rng.uniform() >= opts.missing_share)
      r.earnings = earnings;
    out.push_back(std::move(r));
  };

  for (const auto& b : shapes) {
    const auto n = std::max<std::size_t>(
      60, static_cast<std::size_t>(std::llround(static_cast<double>(b.obs) * opts.scale)));
    const auto extra_low = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * opts.below_floor_share));
    const auto extra_multi = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * opts.multi_platform_share));
    for (std::size_t i = 0; i < n; ++i)
      finish(new_record(b), std::max(10.01, draw_earnings(rng, b)));
    for (std::size_t i = 0; i < extra_low; ++i) {
      // A tenth of these sit exactly on the floor.
      const double e = rng.uniform() < 0.1 ? 10.0 : 0.5 + 9.5 * rng.uniform();
      finish(new_record(b), e);
    }
    for (std::size_t i = 0; i < extra_multi; ++i) {
      auto r = new_record(b);
      std::set<Platform> ps(r.platforms.begin(), r.platforms.end());
      while (ps.size() < 2)
        ps.insert(static_cast<Platform>(rng.below(platform_names.size())));
      r.platforms.assign(ps.begin(), ps.end());
      finish(std::move(r), std::max(10.01, draw_earnings(rng, b)));
    }
  }
  return out;
}

} // namespace tailwise
