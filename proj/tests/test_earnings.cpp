#include "tailwise/earnings.hpp"
#include "tailwise/errors.hpp"
#include "tailwise/rng.hpp"

#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace tailwise;
using Catch::Approx;

namespace {

const std::string header = "creator_id,year,platforms,category,nsfw,members,paid_members,earnings\n";

ParseResult parse(const std::string& body) {
  std::istringstream in(header + body);
  return parse_csv(in);
}

EarningsRecord rec(std::string id, std::vector<Platform> platforms, double earnings,
                   int year = 2021, bool nsfw = false) {
  EarningsRecord r;
  r.creator_id = std::move(id);
  r.year = year;
  r.platforms = std::move(platforms);
  r.category = "music";
  r.nsfw = nsfw;
  r.members = 10;
  r.paid_members = 5;
  r.earnings = earnings;
  return r;
}

double normal(Rng& rng) {
  return std::sqrt(-2.0 * std::log(rng.uniform_open())) * std::cos(2.0 * M_PI * rng.uniform());
}

// earnings = 5 paid_members + N(0, 1).
std::vector<EarningsRecord> linear_records(std::size_t n, std::uint64_t seed) {
  Rng rng{seed};
  std::vector<EarningsRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    EarningsRecord r;
    r.creator_id = "s" + std::to_string(i);
    r.year = 2021;
    r.category = "art";
    r.paid_members = 1 + rng.below(200);
    r.members = r.paid_members + rng.below(300);
    r.earnings = 5.0 * static_cast<double>(r.paid_members) + normal(rng);
    out.push_back(r);
  }
  return out;
}

} // namespace

TEST_CASE("parse a well-formed row") {
  const auto p = parse("c1,2021,instagram,music,false,120,30,250.0\n");
  REQUIRE(p.records.size() == 1);
  CHECK(p.rejected.empty());
  const auto& r = p.records[0];
  CHECK(r.creator_id == "c1");
  CHECK(r.year == 2021);
  CHECK(r.platforms == std::vector<Platform>{Platform::instagram});
  CHECK(r.category == "music");
  CHECK_FALSE(r.nsfw);
  CHECK(r.members == 120);
  CHECK(r.paid_members == 30);
  REQUIRE(r.earnings);
  CHECK(*r.earnings == 250.0);
  CHECK_FALSE(r.imputed);
}

TEST_CASE("parse optional earnings and bad rows") {
  const auto p = parse("c1,2021,,music,true,120,30,\n"
                       "c2,2021,twitter,music,false,10,30,5\n"
                       "c3,2021,myspace,music,false,10,3,5\n"
                       "c4,20x1,twitter,music,false,10,3,5\n"
                       "c5,2021,YouTube;twitter,\"games, misc\",1,10,3,-1\n"
                       "c6,2024,YouTube;twitter,\"games, misc\",1,10,3,7.5\n");
  REQUIRE(p.records.size() == 2);
  CHECK_FALSE(p.records[0].earnings);
  CHECK_FALSE(p.records[0].imputed);
  CHECK(p.records[0].platforms.empty());
  CHECK(p.records[1].category == "games, misc");
  CHECK(p.records[1].platforms == std::vector<Platform>{Platform::twitter, Platform::youtube});
  REQUIRE(p.rejected.size() == 4);
  CHECK(p.rejected[0].line == 3);
  CHECK(p.rejected[0].message.find("paid_members") != std::string::npos);
  CHECK(p.rejected[1].line == 4);
  CHECK(p.rejected[2].line == 5);
  CHECK(p.rejected[3].line == 6);
}

TEST_CASE("parse schema errors") {
  std::istringstream missing("creator_id,year,platforms\nc1,2021,twitter\n");
  CHECK_THROWS_AS(parse_csv(missing), SchemaError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty), SchemaError);
  CHECK_THROWS_AS(parse_csv(std::filesystem::path("/nonexistent/file.csv")), IoError);

  // Column order is free.
  std::istringstream shuffled("earnings,creator_id,platforms,year,category,nsfw,paid_members,members\n"
                              "12.5,c9,twitch,2018,games,0,1,2\n");
  const auto p = parse_csv(shuffled);
  REQUIRE(p.records.size() == 1);
  CHECK(*p.records[0].earnings == 12.5);
  CHECK(p.records[0].members == 2);
}

TEST_CASE("write_csv round-trips") {
  auto records = generate_fixture({.scale = 0.01, .seed = 3});
  std::ostringstream out;
  write_csv(out, records);
  std::istringstream in(out.str());
  auto back = parse_csv(in);
  CHECK(back.rejected.empty());
  CHECK(back.records == records);
}

TEST_CASE("imputation recovers a linear generator") {
  auto records = linear_records(2000, 21);
  const auto model = fit_imputation(records);
  REQUIRE(model.terms[1] == "paid_members");
  CHECK(model.coefficients[1] == Approx(5.0).margin(0.1));
  CHECK(model.r_squared > 0.99);
  CHECK(model.n_train == 2000);

  auto missing = records.front();
  missing.creator_id = "zz";
  missing.earnings.reset();
  missing.paid_members = 100;
  missing.members = 150;
  records.push_back(missing);
  const auto out = impute_earnings(records, model);
  const auto& filled = out.back();
  REQUIRE(filled.earnings);
  CHECK(filled.imputed);
  CHECK(*filled.earnings == Approx(500.0).margin(10.0));
  // Observed values stay as they were.
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    REQUIRE(out[i].earnings == records[i].earnings);
    REQUIRE_FALSE(out[i].imputed);
  }
}

TEST_CASE("imputation preconditions and clamp") {
  CHECK_THROWS_AS(fit_imputation(linear_records(10, 1)), SampleTooSmall);

  ImputationModel m;
  m.terms = {"intercept", "paid_members", "members"};
  m.coefficients = {-3.2, 0.0, 0.0};
  m.categories = {"music"};
  m.years = {2021};
  auto r = rec("c1", {}, 0.0);
  r.earnings.reset();
  CHECK(m.predict(r) == Approx(-3.2));
  const auto out = impute_earnings({r}, m);
  CHECK(*out[0].earnings == 0.0);
  CHECK(out[0].imputed);

  r.category = "unknown";
  bool unseen = false;
  CHECK(m.predict(r, &unseen) == Approx(-3.2));
  CHECK(unseen);
}

TEST_CASE("floor filter") {
  std::vector<EarningsRecord> v{rec("a", {}, 10.00), rec("b", {}, 10.04), rec("c", {}, 3)};
  auto strict = filter_floor(v);
  REQUIRE(strict.kept.size() == 1);
  CHECK(strict.kept[0].creator_id == "b");
  CHECK(strict.dropped == 2);
  auto incl = filter_floor(v, {.floor = 10.0, .inclusive = true});
  CHECK(incl.kept.size() == 2);
  CHECK(filter_floor({}).kept.empty());
  v[0].earnings.reset();
  CHECK_THROWS_AS(filter_floor(v), DomainError);
}

TEST_CASE("single-platform segmentation") {
  const std::vector<EarningsRecord> v{
    rec("a", {Platform::instagram}, 20),
    rec("b", {}, 30),
    rec("c", {Platform::twitter, Platform::youtube}, 40),
    rec("d", {Platform::instagram}, 50),
  };
  const auto seg = segment_single_platform(v);
  CHECK(seg.multi_platform_discarded == 1);
  REQUIRE(seg.buckets.size() == 2);
  CHECK(seg.buckets.at("instagram").size() == 2);
  CHECK(seg.buckets.at(std::string(patreon_bucket)).size() == 1);
  CHECK_FALSE(seg.buckets.contains("twitter"));
  const auto samples = seg.samples();
  CHECK(samples.at("instagram").size() == 2);
}

TEST_CASE("summary statistics examples") {
  const auto st = summary_stats(make_sample({10, 20, 30, 40}, Kind::continuous).sample, "x");
  CHECK(st.obs == 4);
  CHECK(st.mean == 25.0);
  CHECK(st.median == 25.0);
  CHECK(st.q25 == 17.5);
  CHECK(st.q75 == 32.5);
  CHECK(st.min == 10.0);
  CHECK(st.max == 40.0);
  CHECK_FALSE(st.sd_undefined);

  const auto one = summary_stats(make_sample({42}, Kind::continuous).sample);
  CHECK(one.mean == 42);
  CHECK(one.median == 42);
  CHECK(one.q25 == 42);
  CHECK(one.q75 == 42);
  CHECK(one.min == 42);
  CHECK(one.max == 42);
  CHECK(one.sd == 0.0);
  CHECK(one.sd_undefined);
}

TEST_CASE("summary statistics match direct formulas") {
  Rng rng{77};
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(10.0 + std::round(1000.0 * std::pow(rng.uniform_open(), -0.7)) / 100.0);
    const auto st = summary_stats(make_sample(v, Kind::continuous).sample);
    const auto d = oracle::stats(v);
    CHECK(st.mean == Approx(d.mean).epsilon(0).margin(1e-9));
    CHECK(st.sd == Approx(d.sd).epsilon(0).margin(1e-9));
    CHECK(st.median == Approx(d.median).epsilon(0).margin(1e-9));
    CHECK(st.q25 == Approx(d.q25).epsilon(0).margin(1e-9));
    CHECK(st.q75 == Approx(d.q75).epsilon(0).margin(1e-9));
    CHECK(st.min <= st.q25);
    CHECK(st.q25 <= st.median);
    CHECK(st.median <= st.q75);
    CHECK(st.q75 <= st.max);
  }
}

TEST_CASE("Table 1 row formatting") {
  PlatformStats fb{"facebook", 8458, 149.3, 46.5, 631.2, 10.0, 29.6, 99.0, 35261.0, false};
  CHECK(table1_row(fb) == std::vector<std::string>{"Facebook", "8,458", "149", "47", "631",
                                                   "10.00", "29.6", "46.5", "99.0", "35,261"});
  CHECK(table1_header() == std::vector<std::string>{"Platform", "Obs", "Mean", "Median", "SD",
                                                    "Min", "Q25", "Q50", "Q75", "Max"});
  PlatformStats tw{"twitch", 1793, 198.0, 46.0, 1174.0, 10.04, 28.8, 104.6, 31436.0, false};
  CHECK(table1_row(tw)[5] == "10.04");
  CHECK(display_name(patreon_bucket) == "Patreon");
  CHECK(display_name("youtube") == "Youtube");
  CHECK(format_number(169106, 0) == "169,106");
  CHECK(format_number(1234567.891, 2) == "1,234,567.89");
  CHECK(format_number(0.125, 2) == "0.13");
  CHECK(format_number(-1500, 0) == "-1,500");
  CHECK(format_number(1500, 0, false) == "1500");

  std::ostringstream os;
  write_table(os, table1_header(), {table1_row(fb)});
  CHECK(os.str() == "Platform,Obs,Mean,Median,SD,Min,Q25,Q50,Q75,Max\n"
                    "Facebook,\"8,458\",149,47,631,10.00,29.6,46.5,99.0,\"35,261\"\n");
}

TEST_CASE("Table 2 rows") {
  NsfwRow tw{"twitter", 2024, 23966, 399.2, 72.0, 0.58};
  CHECK(table2_row(tw) == std::vector<std::string>{"Twitter", "2024", "23,966", "399", "72", "0.58"});
  CHECK(table2_header() == std::vector<std::string>{"Platform", "Year", "Num_Observations",
                                                    "Mean_Earnings", "Median_Earnings",
                                                    "Sum_Is_Nsfw"});

  Segmentation seg;
  seg.buckets["twitter"] = {rec("a", {Platform::twitter}, 20, 2024, true),
                            rec("b", {Platform::twitter}, 30, 2024),
                            rec("c", {Platform::twitter}, 40, 2024),
                            rec("d", {Platform::twitter}, 50, 2024)};
  seg.buckets["youtube"] = {rec("e", {Platform::youtube}, 20, 2018)};
  const auto rows = nsfw_breakdown(seg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].platform == "twitter");
  CHECK(rows[0].nsfw_share == 0.25);
  CHECK(rows[0].obs == 4);
  CHECK(rows[0].mean == 35.0);
  CHECK(rows[0].median == 35.0);
  CHECK(rows[1].year == 2018);
  // Years with no records produce no row.
  CHECK(std::none_of(rows.begin(), rows.end(),
                     [](const NsfwRow& r) { return r.platform == "youtube" && r.year != 2018; }));
}

TEST_CASE("pipeline invariants on the generated fixture") {
  const auto raw = generate_fixture({.scale = 0.02, .seed = 5});
  auto run = [](std::vector<EarningsRecord> records) {
    std::sort(records.begin(), records.end(), canonical_less);
    const auto model = fit_imputation(records);
    auto floored = filter_floor(impute_earnings(std::move(records), model));
    return floored;
  };
  const auto base = run(raw);

  // Order-insensitive.
  auto shuffled = raw;
  Rng rng{9};
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  const auto again = run(shuffled);
  CHECK(again.kept == base.kept);
  const auto s1 = segment_single_platform(base.kept).samples();
  const auto s2 = segment_single_platform(again.kept).samples();
  REQUIRE(s1.size() == s2.size());
  for (const auto& [name, s] : s1) {
    const auto a = summary_stats(s);
    const auto b = summary_stats(s2.at(name));
    CHECK(a.mean == b.mean);
    CHECK(a.sd == b.sd);
    CHECK(a.q75 == b.q75);
  }

  // Idempotent on its own output.
  const auto twice = run(base.kept);
  CHECK(twice.kept == base.kept);
  CHECK(twice.dropped == 0);

  // Bucket sizes add up.
  const auto seg = segment_single_platform(base.kept);
  std::size_t total = 0;
  for (const auto& [name, recs] : seg.buckets)
    total += recs.size();
  CHECK(total == base.kept.size() - seg.multi_platform_discarded);
  CHECK(seg.multi_platform_discarded > 0);
}

TEST_CASE("fixture generator") {
  const auto a = generate_fixture({.scale = 0.01, .seed = 1});
  const auto b = generate_fixture({.scale = 0.01, .seed = 1});
  CHECK(a == b);
  const auto missing = std::count_if(a.begin(), a.end(), [](const auto& r) { return !r.earnings; });
  CHECK(missing > 0);
  for (const auto& r : a)
    REQUIRE(r.paid_members <= r.members);
}
