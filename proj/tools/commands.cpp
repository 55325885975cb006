#include "tailwise_cli.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

namespace tailwise::cli {

namespace {

namespace fs = std::filesystem;

// Everything needed to rerun a command and check its outputs.
struct Recorder {
  std::string command;
  std::vector<std::string> args;
  json options = json::object();
  std::optional<std::uint64_t> seed;
  std::vector<fs::path> inputs;
  /// "dir" when --out names a directory, "file" when it names a file.
  std::string out_kind;
  fs::path out_root;
  std::vector<std::string> outputs; ///< relative to out_root; "-" is stdout
  std::string stdout_bytes;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  [[nodiscard]] json manifest() const {
    json in = json::array();
    for (const auto& p : inputs)
      in.push_back(json{{"path", p.string()}, {"fnv1a64", hex64(file_digest(p))}});
    json outs = json::array();
    for (const auto& o : outputs) {
      const auto digest = o == "-" ? fnv1a64(stdout_bytes) : file_digest(out_root / o);
      outs.push_back(json{{"path", o}, {"fnv1a64", hex64(digest)}});
    }
    const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return json{{"tool", "tailwise"},
                {"version", tool_version},
                {"command", command},
                {"args", args},
                {"options", options},
                {"seed", seed ? json(*seed) : json(nullptr)},
                {"inputs", in},
                {"out_kind", out_kind},
                {"outputs", outs},
                {"wall_clock_seconds", wall}};
  }
};

std::string absolute(const std::string& p) {
  return fs::absolute(p).lexically_normal().string();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << bytes;
  if (!f)
    throw IoError("cannot write " + path.string());
}

void write_manifest(const fs::path& path, const Recorder& rec) {
  write_file(path, rec.manifest().dump(2) + "\n");
}

Sample column_sample(const std::string& input, const std::string& column, Kind kind,
                     std::ostream& err) {
  auto data = read_column(input, column);
  if (data.skipped > 0)
    err << "warning: " << data.skipped << " blank or non-numeric cells skipped\n";
  if (data.values.empty())
    throw EmptySample("no numeric values in " + input);
  auto built = make_sample(std::move(data.values), kind);
  if (built.rejected > 0)
    err << "warning: " << built.rejected << " nonpositive or non-finite values dropped\n";
  return std::move(built.sample);
}

struct FitArgs {
  std::string input;
  std::string column;
  std::string kind = "continuous";
  std::optional<double> xmin;
  std::size_t min_tail = 50;
  std::size_t bootstrap = 0;
  std::uint64_t seed = default_seed;
  std::optional<std::size_t> candidate_cap;
  bool discrete_approx = false;
  std::string manifest;
};

void cmd_fit(const FitArgs& a, Recorder& rec, std::ostream& out, std::ostream& err) {
  FitOptions opts;
  opts.kind = parse_kind(a.kind);
  opts.min_tail = a.min_tail;
  opts.xmin_override = a.xmin;
  opts.candidate_cap = a.candidate_cap;
  opts.discrete_exact = !a.discrete_approx;
  opts.validate();
  if (a.bootstrap != 0 && a.bootstrap < 100)
    throw ConfigError("--bootstrap needs at least 100 replicates (or 0 to skip)");
  const auto s = column_sample(a.input, a.column, opts.kind, err);
  const auto fit = select_xmin(s, opts);
  json j{{"input", a.input}, {"fit", to_json(fit)}, {"seed", a.seed}};
  if (a.bootstrap > 0)
    j["gof"] = to_json(gof_pvalue(s, fit, a.bootstrap, a.seed, opts));
  rec.stdout_bytes = j.dump(2) + "\n";
  out << rec.stdout_bytes;
}

struct SimArgs {
  std::string model = "copy";
  std::size_t nodes = 100000;
  double gamma = 0.0;
  std::size_t m = 1;
  std::uint64_t seed = default_seed;
  unsigned arrival_units = 0;
  bool fit = false;
  std::size_t min_tail = 50;
  std::string out;
  std::string manifest;
};

void cmd_simulate(const SimArgs& a, Recorder& rec, std::ostream& out) {
  GrowthConfig cfg;
  if (a.model == "copy")
    cfg.model = GrowthModel::copy;
  else if (a.model == "ba")
    cfg.model = GrowthModel::ba;
  else
    throw ConfigError("--model must be copy or ba");
  cfg.n_nodes = a.nodes;
  cfg.gamma = a.gamma;
  cfg.m = a.m;
  cfg.seed = a.seed;
  cfg.arrival_units = a.arrival_units;
  cfg.validate();
  FitOptions fit_opts;
  fit_opts.min_tail = a.min_tail;
  fit_opts.validate();

  const auto d = simulate(cfg);
  std::string degrees;
  if (!a.out.empty() || !a.fit) {
    std::ostringstream os;
    os << "node,count\n";
    for (std::size_t i = 0; i < d.counts.size(); ++i)
      os << i << ',' << d.counts[i] << '\n';
    degrees = os.str();
  }
  if (!a.out.empty()) {
    write_file(a.out, degrees);
    rec.outputs.push_back(fs::path(a.out).filename().string());
  }
  if (a.out.empty() && !a.fit) {
    rec.stdout_bytes = degrees;
  } else {
    json j{{"model", a.model}, {"nodes", a.nodes},
           {"seed", a.seed},   {"steps", d.steps},
           {"initial_total", d.initial_total}, {"total", d.total()}};
    if (cfg.model == GrowthModel::copy) {
      j["gamma"] = a.gamma;
      j["arrival_units"] = a.arrival_units;
    } else {
      j["m"] = a.m;
    }
    if (a.fit) {
      j["fit"] = to_json(measure_exponent(d, fit_opts));
      if (cfg.model == GrowthModel::copy && a.arrival_units == 0) {
        const auto pred = theoretical_alpha(a.gamma);
        j["alpha_predicted"] = std::isfinite(pred.alpha_predicted)
                                 ? json(pred.alpha_predicted)
                                 : json(nullptr);
        j["regime"] = pred.regime == Regime::power_law ? "power_law" : "exponential";
      } else if (cfg.model == GrowthModel::copy) {
        j["alpha_predicted"] =
          a.gamma < 1.0 ? json(1.0 + 2.0 / (1.0 - a.gamma)) : json(nullptr);
      } else {
        j["alpha_predicted"] = 3.0;
      }
    }
    rec.stdout_bytes = j.dump(2) + "\n";
  }
  out << rec.stdout_bytes;
}

struct CompareArgs {
  std::string input;
  std::string column;
  std::uint64_t seed = default_seed;
  std::optional<std::size_t> k;
  double rho = -1.0;
  std::size_t replicates = 200;
  std::size_t min_tail = 50;
  double flag_spread = 0.2;
  std::string manifest;
};

void cmd_compare(const CompareArgs& a, Recorder& rec, std::ostream& out, std::ostream& err) {
  ComparisonOptions opts;
  opts.cns.min_tail = a.min_tail;
  opts.cns.validate();
  opts.adjusted.rho = a.rho;
  opts.bootstrap.replicates = a.replicates;
  opts.k_override = a.k;
  opts.flag_spread = a.flag_spread;
  const auto s = column_sample(a.input, a.column, Kind::continuous, err);
  const auto cmp = estimator_comparison(s, a.seed, opts);
  std::ostringstream os;
  os << "method,alpha,gamma,threshold,k_used,stderr\n";
  for (const auto& e : cmp.estimates) {
    os << to_string(e.method) << ',' << (e.alpha ? fmt::format("{}", *e.alpha) : "") << ','
       << fmt::format("{}", e.gamma) << ',' << fmt::format("{}", e.threshold) << ','
       << e.k_used << ',' << (e.std_error ? fmt::format("{}", *e.std_error) : "") << '\n';
  }
  if (cmp.flagged)
    err << fmt::format("warning: alpha estimates spread over {:.3f} (> {:g})\n",
                       cmp.alpha_spread, a.flag_spread);
  rec.stdout_bytes = os.str();
  out << rec.stdout_bytes;
}

struct SweepArgs {
  std::vector<double> gammas{0.0, 0.2, 0.5};
  std::size_t nodes = 200000;
  std::size_t runs = 5;
  std::uint64_t seed = default_seed;
  std::size_t min_tail = 50;
};

void cmd_sweep(const SweepArgs& a, std::ostream& out) {
  FitOptions opts;
  opts.min_tail = a.min_tail;
  opts.validate();
  if (a.runs == 0)
    throw ConfigError("--runs must be positive");
  GrowthConfig probe;
  probe.n_nodes = a.nodes;
  probe.validate();
  const auto rows = gamma_sweep(a.gammas, a.nodes, a.runs, a.seed, opts);
  out << "gamma,alpha_predicted,alpha_mean,alpha_sd,n_runs\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{}\n", r.gamma, r.alpha_pred,
                       std::isfinite(r.alpha_mean) ? fmt::format("{}", r.alpha_mean) : "",
                       r.alpha_sd, r.n_runs);
  }
}

struct FixtureArgs {
  std::string out;
  FixtureOptions opts;
};

void cmd_fixture(const FixtureArgs& a, std::ostream& out) {
  std::ostringstream os;
  write_csv(os, generate_fixture(a.opts));
  if (a.out.empty())
    out << os.str();
  else
    write_file(a.out, os.str());
}

int cmd_replay(const std::string& manifest_path, const std::string& out_dir,
               std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.contains("args") || !m.contains("outputs") || !m.contains("out_kind"))
    throw SchemaError("manifest lacks args, outputs or out_kind");
  auto args = m["args"].get<std::vector<std::string>>();
  const auto kind = m["out_kind"].get<std::string>();

  for (const auto& i : m.value("inputs", json::array())) {
    const auto p = i.at("path").get<std::string>();
    std::string now = "missing";
    try {
      now = hex64(file_digest(p));
    } catch (const IoError&) {
    }
    if (now != i.at("fnv1a64").get<std::string>())
      err << "warning: input " << p << " differs from the recorded digest\n";
  }

  fs::path root = out_dir;
  std::vector<std::string> rerun;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--manifest" && i + 1 < args.size()) {
      ++i;
      continue;
    }
    if (args[i] == "--out" && i + 1 < args.size()) {
      rerun.push_back(args[i]);
      const fs::path original = args[++i];
      rerun.push_back(kind == "file" ? (root / original.filename()).string() : root.string());
      continue;
    }
    rerun.push_back(args[i]);
  }
  fs::create_directories(root);

  std::ostringstream captured;
  const int code = run_cli(rerun, captured, err);
  if (code != exit_ok) {
    err << "error: replayed command exited with " << code << '\n';
    return code;
  }
  json mismatched = json::array();
  std::size_t matched = 0;
  for (const auto& o : m["outputs"]) {
    const auto path = o.at("path").get<std::string>();
    std::string digest;
    try {
      digest = hex64(path == "-" ? fnv1a64(captured.str()) : file_digest(root / path));
    } catch (const IoError&) {
      digest = "missing";
    }
    if (digest == o.at("fnv1a64").get<std::string>())
      ++matched;
    else
      mismatched.push_back(path);
  }
  out << json{{"command", m.value("command", "")},
              {"outputs", m["outputs"].size()},
              {"matched", matched},
              {"mismatched", mismatched}}
           .dump(2)
      << '\n';
  return mismatched.empty() ? exit_ok : exit_failure;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-law tail estimation for creator earnings and growth models", "tailwise"};
  app.set_version_flag("--version", tool_version);
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a power-law tail to one column of numbers");
  fit->add_option("input", fa.input, "CSV or one-value-per-line file")->required();
  fit->add_option("--column", fa.column, "Column name when the file has a header");
  fit->add_option("--kind", fa.kind, "continuous or discrete")->capture_default_str();
  fit->add_option("--xmin", fa.xmin, "Fixed threshold; skips the scan");
  fit->add_option("--min-tail", fa.min_tail, "Smallest tail a threshold may leave")
    ->capture_default_str();
  fit->add_option("--bootstrap", fa.bootstrap, "Goodness-of-fit replicates (0 = off, else >= 100)")
    ->capture_default_str();
  fit->add_option("--seed", fa.seed)->capture_default_str();
  fit->add_option("--candidate-cap", fa.candidate_cap, "Thin the threshold candidates");
  fit->add_flag("--discrete-approx", fa.discrete_approx,
                "Closed-form discrete estimate instead of the zeta likelihood");
  fit->add_option("--manifest", fa.manifest, "Write a run manifest here");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Grow a copy-model or Barabasi-Albert network");
  sim->add_option("--model", sa.model, "copy or ba")->capture_default_str();
  sim->add_option("--nodes", sa.nodes)->capture_default_str();
  sim->add_option("--gamma", sa.gamma, "Exploration probability (copy model)")
    ->capture_default_str();
  sim->add_option("--m", sa.m, "Edges per new node (ba)")->capture_default_str();
  sim->add_option("--seed", sa.seed)->capture_default_str();
  sim->add_option("--arrival-units", sa.arrival_units,
                  "Attention a creator holds on arrival (copy model; 0 or 1)")
    ->capture_default_str();
  sim->add_flag("--fit", sa.fit, "Measure the exponent of the resulting counts");
  sim->add_option("--min-tail", sa.min_tail)->capture_default_str();
  sim->add_option("--out", sa.out, "Write the node,count table here");
  sim->add_option("--manifest", sa.manifest, "Write a run manifest here");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Measured against predicted exponent over gamma");
  sweep->add_option("--gammas", wa.gammas)->delimiter(',')->capture_default_str();
  sweep->add_option("--nodes", wa.nodes)->capture_default_str();
  sweep->add_option("--runs", wa.runs, "Simulations per gamma")->capture_default_str();
  sweep->add_option("--seed", wa.seed)->capture_default_str();
  sweep->add_option("--min-tail", wa.min_tail)->capture_default_str();

  PipelineOptions po;
  std::string po_input;
  std::string po_out;
  auto* pipe = app.add_subcommand("pipeline", "Earnings CSV to tables, fits and figures");
  pipe->add_option("input", po_input, "Earnings CSV")->required();
  pipe->add_option("--out", po_out, "Output directory")->required();
  pipe->add_option("--floor", po.floor.floor, "Earnings floor in USD")->capture_default_str();
  pipe->add_flag("--floor-inclusive", po.floor.inclusive, "Keep earnings equal to the floor");
  pipe->add_option("--bootstrap", po.bootstrap, "Goodness-of-fit replicates per platform")
    ->capture_default_str();
  pipe->add_option("--seed", po.seed)->capture_default_str();
  pipe->add_option("--min-tail", po.min_tail)->capture_default_str();

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "CNS, Hill, adjusted Hill and moments side by side");
  cmp->add_option("input", ca.input, "CSV or one-value-per-line file")->required();
  cmp->add_option("--column", ca.column);
  cmp->add_option("--seed", ca.seed)->capture_default_str();
  cmp->add_option("--k", ca.k, "Order statistics to use instead of the double bootstrap");
  cmp->add_option("--rho", ca.rho, "Second-order parameter of the adjusted Hill estimator")
    ->capture_default_str();
  cmp->add_option("--replicates", ca.replicates, "Double-bootstrap replicates")
    ->capture_default_str();
  cmp->add_option("--min-tail", ca.min_tail)->capture_default_str();
  cmp->add_option("--flag-spread", ca.flag_spread)->capture_default_str();
  cmp->add_option("--manifest", ca.manifest, "Write a run manifest here");

  FixtureArgs xa;
  auto* fix = app.add_subcommand("fixture", "Write a synthetic earnings CSV");
  fix->add_option("--out", xa.out, "Destination (stdout when omitted)");
  fix->add_option("--seed", xa.opts.seed)->capture_default_str();
  fix->add_option("--scale", xa.opts.scale)->capture_default_str();
  fix->add_option("--missing-share", xa.opts.missing_share)->capture_default_str();
  fix->add_option("--multi-share", xa.opts.multi_platform_share)->capture_default_str();
  fix->add_option("--below-floor-share", xa.opts.below_floor_share)->capture_default_str();

  std::string replay_manifest;
  std::string replay_out;
  auto* rep = app.add_subcommand("replay", "Rerun a recorded command and compare outputs");
  rep->add_option("manifest", replay_manifest)->required();
  rep->add_option("--out", replay_out, "Directory for the rerun outputs")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    Recorder rec;
    if (fit->parsed()) {
      rec.command = "fit";
      rec.seed = fa.seed;
      rec.inputs = {absolute(fa.input)};
      rec.args = {"fit", absolute(fa.input), "--kind", fa.kind, "--min-tail",
                  std::to_string(fa.min_tail), "--bootstrap", std::to_string(fa.bootstrap),
                  "--seed", std::to_string(fa.seed)};
      if (!fa.column.empty())
        rec.args.insert(rec.args.end(), {"--column", fa.column});
      if (fa.xmin)
        rec.args.insert(rec.args.end(), {"--xmin", fmt::format("{}", *fa.xmin)});
      if (fa.candidate_cap)
        rec.args.insert(rec.args.end(), {"--candidate-cap", std::to_string(*fa.candidate_cap)});
      if (fa.discrete_approx)
        rec.args.push_back("--discrete-approx");
      rec.outputs = {"-"};
      cmd_fit(fa, rec, out, err);
      if (!fa.manifest.empty())
        write_manifest(fa.manifest, rec);
    } else if (sim->parsed()) {
      rec.command = "simulate";
      rec.seed = sa.seed;
      rec.args = {"simulate", "--model", sa.model, "--nodes", std::to_string(sa.nodes),
                  "--gamma", fmt::format("{}", sa.gamma), "--m", std::to_string(sa.m),
                  "--seed", std::to_string(sa.seed), "--arrival-units",
                  std::to_string(sa.arrival_units), "--min-tail", std::to_string(sa.min_tail)};
      if (sa.fit)
        rec.args.push_back("--fit");
      if (!sa.out.empty()) {
        rec.args.insert(rec.args.end(), {"--out", absolute(sa.out)});
        rec.out_kind = "file";
        rec.out_root = fs::path(absolute(sa.out)).parent_path();
      }
      cmd_simulate(sa, rec, out);
      rec.outputs.push_back("-");
      if (!sa.manifest.empty())
        write_manifest(sa.manifest, rec);
    } else if (sweep->parsed()) {
      cmd_sweep(wa, out);
    } else if (pipe->parsed()) {
      po.input = absolute(po_input);
      po.out_dir = absolute(po_out);
      rec.command = "pipeline";
      rec.seed = po.seed;
      rec.inputs = {po.input};
      rec.args = {"pipeline", po.input.string(), "--out", po.out_dir.string(), "--floor",
                  fmt::format("{}", po.floor.floor), "--bootstrap",
                  std::to_string(po.bootstrap), "--seed", std::to_string(po.seed),
                  "--min-tail", std::to_string(po.min_tail)};
      if (po.floor.inclusive)
        rec.args.push_back("--floor-inclusive");
      rec.options = json{{"floor", po.floor.floor},       {"floor_inclusive", po.floor.inclusive},
                         {"bootstrap", po.bootstrap},     {"min_tail", po.min_tail}};
      rec.out_kind = "dir";
      rec.out_root = po.out_dir;
      auto result = run_pipeline(po, err);
      rec.outputs = result.outputs;
      json manifest = rec.manifest();
      manifest["fit_digests"] = result.fit_digests;
      manifest["warnings"] = result.warnings;
      write_file(po.out_dir / "manifest.json", manifest.dump(2) + "\n");
      out << json{{"out_dir", po.out_dir.string()},
                  {"outputs", result.outputs.size()},
                  {"warnings", result.warnings}}
                 .dump(2)
          << '\n';
    } else if (cmp->parsed()) {
      rec.command = "compare";
      rec.seed = ca.seed;
      rec.inputs = {absolute(ca.input)};
      rec.args = {"compare", absolute(ca.input), "--seed", std::to_string(ca.seed), "--rho",
                  fmt::format("{}", ca.rho), "--replicates", std::to_string(ca.replicates),
                  "--min-tail", std::to_string(ca.min_tail), "--flag-spread",
                  fmt::format("{}", ca.flag_spread)};
      if (!ca.column.empty())
        rec.args.insert(rec.args.end(), {"--column", ca.column});
      if (ca.k)
        rec.args.insert(rec.args.end(), {"--k", std::to_string(*ca.k)});
      rec.outputs = {"-"};
      cmd_compare(ca, rec, out, err);
      if (!ca.manifest.empty())
        write_manifest(ca.manifest, rec);
    } else if (fix->parsed()) {
      cmd_fixture(xa, out);
    } else if (rep->parsed()) {
      return cmd_replay(replay_manifest, replay_out, out, err);
    }
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    const auto* te = dynamic_cast<const Error*>(&e);
    err << "error: " << (te ? to_string(te->code()) : "failure") << ": " << e.what() << '\n';
    return code;
  }
  return exit_ok;
}

} // namespace tailwise::cli
