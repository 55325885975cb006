#pragma once

#include "tailwise/alt_estimators.hpp"
#include "tailwise/cns_fit.hpp"
#include "tailwise/earnings.hpp"
#include "tailwise/growth.hpp"
#include "tailwise/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tailwise::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_too_small = 3,
  exit_degenerate = 4,
};

int exit_code_for(const std::exception& e);

/// Entry point shared by the executable and the tests. Data goes to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

json to_json(const TailFit& fit);
json to_json(const GofResult& gof);
json to_json(const PlatformStats& st);
json to_json(const ImputationModel& m);
json to_json(const TailIndexEstimate& e);

/// Numbers from one column of a text file. A first line that does not parse
/// as numbers is taken as a header; `column` selects by header name
/// (default: "earnings" when present, else the first column). Blank and
/// unparsable cells are skipped and counted.
struct ColumnData {
  std::vector<double> values;
  std::size_t skipped = 0;
};
ColumnData read_column(const std::filesystem::path& path, const std::string& column = {});

struct PipelineOptions {
  std::filesystem::path input;
  std::filesystem::path out_dir;
  FloorOptions floor;
  std::size_t bootstrap = 0;
  std::uint64_t seed = default_seed;
  std::size_t min_tail = 50;
};

struct PipelineResult {
  /// Written files relative to out_dir, in write order.
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  /// FNV-1a of each fit's JSON, keyed by fit label.
  json fit_digests = json::object();
};

/// Parse, impute, floor, segment, summarize, fit and render into out_dir.
PipelineResult run_pipeline(const PipelineOptions& opts, std::ostream& err);

/// Hash of a file's bytes; throws IoError when unreadable.
std::uint64_t file_digest(const std::filesystem::path& path);

} // namespace tailwise::cli
