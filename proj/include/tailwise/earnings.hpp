#pragma once

#include "tailwise/powerlaw.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailwise {

inline constexpr std::string_view patreon_bucket = "patreon";

/// Social platforms a creator record may list. A record with none is
/// Patreon-only.
enum class Platform { facebook, instagram, twitch, twitter, youtube };

std::string_view to_string(Platform p);
std::optional<Platform> parse_platform(std::string_view name);

struct EarningsRecord {
  std::string creator_id;
  int year = 0;
  std::vector<Platform> platforms; ///< sorted, unique
  std::string category;
  bool nsfw = false;
  std::uint64_t members = 0;
  std::uint64_t paid_members = 0;
  std::optional<double> earnings; ///< USD per month
  bool imputed = false;
  /// Imputed with the reference level substituted for a category or year the
  /// imputation model never saw.
  bool unseen_level = false;

  friend bool operator==(const EarningsRecord&, const EarningsRecord&) = default;
};

/// Canonical ordering; pipeline stages sort by it so row order in the input
/// file never matters.
bool canonical_less(const EarningsRecord& a, const EarningsRecord& b);

struct Diagnostic {
  std::size_t line;
  std::string message;
};

struct ParseResult {
  std::vector<EarningsRecord> records;
  std::vector<Diagnostic> rejected;
};

/// Columns every earnings CSV must carry (any order; extra columns ignored).
const std::vector<std::string>& earnings_columns();

/// Throws IoError when the file cannot be read and SchemaError when a
/// required column is missing. Malformed rows are skipped and reported.
ParseResult parse_csv(const std::filesystem::path& path);
ParseResult parse_csv(std::istream& in);

void write_csv(std::ostream& out, const std::vector<EarningsRecord>& records);

/// Linear model earnings ~ 1 + paid_members + members + category + nsfw + year
/// on levels, one reference level dropped per categorical block.
struct ImputationModel {
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  std::vector<std::string> categories; ///< first entry is the reference
  std::vector<int> years;              ///< first entry is the reference
  double r_squared = 0.0;
  std::size_t n_train = 0;

  /// Unclamped prediction. Sets *unseen when the record's category or year
  /// was absent from training; the reference level is used instead.
  [[nodiscard]] double predict(const EarningsRecord& r, bool* unseen = nullptr) const;
};

/// Ordinary least squares through the normal equations with 1e-8 added to
/// the diagonal. Needs at least 50 records with observed earnings
/// (SampleTooSmall); throws SingularDesign if the system still cannot be
/// solved.
ImputationModel fit_imputation(const std::vector<EarningsRecord>& records);

/// Fills missing earnings with predictions clamped below at 0. Observed
/// values are left alone.
std::vector<EarningsRecord> impute_earnings(std::vector<EarningsRecord> records,
                                            const ImputationModel& model);

struct FloorOptions {
  double floor = 10.0;
  /// Keep earnings == floor as well.
  bool inclusive = false;
};

struct FloorResult {
  std::vector<EarningsRecord> kept;
  std::size_t dropped = 0;
};

/// Keeps records earning more than the floor. Every record must carry
/// earnings (DomainError otherwise).
FloorResult filter_floor(std::vector<EarningsRecord> records, const FloorOptions& opts = {});

struct Segmentation {
  /// Bucket name (platform or "patreon") to its records; only nonempty
  /// buckets appear.
  std::map<std::string, std::vector<EarningsRecord>> buckets;
  std::size_t multi_platform_discarded = 0;

  /// Earnings of each bucket as a continuous sample.
  [[nodiscard]] std::map<std::string, Sample> samples() const;
};

Segmentation segment_single_platform(const std::vector<EarningsRecord>& records);

/// Earnings of a record list as a continuous sample (all must be present).
Sample earnings_sample(const std::vector<EarningsRecord>& records);

struct PlatformStats {
  std::string platform;
  std::size_t obs = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  /// Set when sd is reported as 0 because obs == 1.
  bool sd_undefined = false;
};

/// Type-7 quantile: linear interpolation at h = (n - 1) p on sorted values.
double quantile_linear(std::span<const double> sorted, double p);

/// Mean, sample SD (n - 1 denominator) and linear-interpolation quantiles.
PlatformStats summary_stats(const Sample& s, std::string platform = {});

/// Display name: "facebook" -> "Facebook", "youtube" -> "Youtube".
std::string display_name(std::string_view bucket);

/// "8458" -> "8,458" after rounding to `decimals` places.
std::string format_number(double v, int decimals, bool separators = true);

/// Cells of a published-style summary row:
/// Platform, Obs, Mean, Median, SD, Min, Q25, Q50, Q75, Max.
std::vector<std::string> table1_header();
std::vector<std::string> table1_row(const PlatformStats& st);

struct NsfwRow {
  std::string platform;
  int year;
  std::size_t obs;
  double mean;
  double median;
  double nsfw_share;
};

/// One row per nonempty (bucket, year), ordered by bucket then year.
std::vector<NsfwRow> nsfw_breakdown(const Segmentation& seg);

std::vector<std::string> table2_header();
std::vector<std::string> table2_row(const NsfwRow& row);

/// Writes rows as CSV, quoting cells that contain commas or quotes.
void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

struct FixtureOptions {
  /// Fraction of the reference platform-year sizes to generate.
  double scale = 0.05;
  std::uint64_t seed = 20240301;
  /// Share of rows whose earnings field is left empty.
  double missing_share = 0.2;
  /// Share of extra rows listing two or more platforms.
  double multi_platform_share = 0.08;
  /// Share of extra rows earning at or below the floor.
  double below_floor_share = 0.1;
};

/// Synthetic creator records shaped like real platform-year buckets: a
/// lognormal body with a Pareto tail, paid members roughly proportional to
/// earnings, and per-bucket NSFW shares.
std::vector<EarningsRecord> generate_fixture(const FixtureOptions& opts = {});

} // namespace tailwise
