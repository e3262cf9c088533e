#include "proxkit/tools/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <map>
#include <ostream>

#include "proxkit/annotation.hpp"
#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"
#include "proxkit/keyvalue.hpp"
#include "proxkit/reliability.hpp"
#include "proxkit/service.hpp"
#include "proxkit/survey.hpp"
#include "proxkit/tools/http_api.hpp"
#include "proxkit/triangulation.hpp"

namespace proxkit::cli {

namespace {

/// Bad flag values and config problems: reported with exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int parse_config_int(const std::string& key, const std::string& value) {
  try {
    return static_cast<int>(csv::parse_int(value, key, 0));
  } catch (const Error&) {
    throw Error(Errc::InvalidConfig, key + " must be an integer");
  }
}

TieBreak parse_tie_break(const std::string& value) {
  if (value == "closest") return TieBreak::Closest;
  if (value == "farthest") return TieBreak::Farthest;
  throw Error(Errc::InvalidConfig, "tie_break must be closest or farthest");
}

ShareDenominator parse_denominator(const std::string& value) {
  if (value == "on_grid") return ShareDenominator::OnGrid;
  if (value == "total") return ShareDenominator::Total;
  throw Error(Errc::InvalidConfig, "denominator must be on_grid or total");
}

void check_window(int window) {
  if (window != 0 && (window < 3 || window % 2 == 0)) {
    throw UsageError("smoothing window must be 0 or an odd number >= 3");
  }
}

struct Common {
  std::string config;
  std::optional<int> window;
  bool no_smoothing = false;
  std::string tie_break;
  std::string denominator;
};

void add_config_flag(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value settings file (or PROXKIT_CONFIG)");
}

void add_metrics_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--window", c.window, "blip filter window (odd >= 3, 0 disables)");
  cmd->add_flag("--no-smoothing", c.no_smoothing, "skip the blip filter");
  cmd->add_option("--tie-break", c.tie_break, "closest | farthest");
  cmd->add_option("--denominator", c.denominator, "on_grid | total");
}

CliConfig load_config(const std::string& flag) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("PROXKIT_CONFIG"); env && *env) path = env;
  }
  if (path.empty() || path == "default") return {};
  const std::filesystem::path p(path);
  try {
    return CliConfig::parse(read_text_file(p), p.parent_path());
  } catch (const Error& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

/// Flags override the config file, which overrides defaults.
CliConfig resolve(const Common& c) {
  auto cfg = load_config(c.config);
  try {
    if (c.window) cfg.metrics.smoothing_window = *c.window;
    if (c.no_smoothing) cfg.metrics.smoothing_window = 0;
    if (!c.tie_break.empty()) cfg.metrics.tie_break = parse_tie_break(c.tie_break);
    if (!c.denominator.empty()) cfg.metrics.denominator = parse_denominator(c.denominator);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  check_window(cfg.metrics.smoothing_window);
  return cfg;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::optional<SliceKey> parse_slice_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    return SliceKey::parse(text);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
}

// ---- subcommands ----------------------------------------------------------

int cmd_validate(const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
  int status = kExitOk;
  for (const auto& file : files) {
    try {
      const auto loaded = load_annotation(file);
      for (const auto& w : loaded.warnings) err << file << ": warning: " << w << '\n';
      const auto report = validate_annotation_set(loaded.set);
      for (const auto& w : report.warnings) err << file << ": warning: " << w.message << '\n';
      out << file << ": ok (" << loaded.set.records.size() << " records, "
          << slices_of(loaded.set).size() << " slices)\n";
    } catch (const Error& e) {
      err << file << ": " << e.what() << '\n';
      status = kExitInvalid;
    }
  }
  return status;
}

int cmd_metrics(const std::vector<std::string>& files, const std::string& slice_flag,
                const std::string& out_path, const CliConfig& cfg, std::ostream& out,
                std::ostream& err) {
  const auto only = parse_slice_flag(slice_flag);
  std::vector<MetricsRow> rows;
  for (const auto& file : files) {
    const auto loaded = load_annotation(file);
    for (const auto& w : loaded.warnings) err << file << ": warning: " << w << '\n';
    const auto slices = only ? std::vector<SliceKey>{*only} : slices_of(loaded.set);
    for (const auto& slice : slices) {
      const auto m = session_metrics(loaded.set, slice, cfg.metrics);
      for (const auto& s : m.skipped) {
        err << file << ": skipped track " << s.track_id << ": " << s.reason << '\n';
      }
      const auto r = metrics_rows(m);
      rows.insert(rows.end(), r.begin(), r.end());
    }
  }
  emit(write_metrics_csv(rows), out_path, out);
  return kExitOk;
}

int cmd_reliability(const std::string& file, const std::string& a, const std::string& b,
                    const std::string& out_path, std::ostream& out) {
  const auto sa = *parse_slice_flag(a);
  const auto sb = *parse_slice_flag(b);
  const auto set = load_annotation(file).set;
  const auto pairs = pair_labels(set, sa, sb);
  const auto report = reliability_report(pairs);
  const ReliabilityRow row{set.meta.session_id, sa, sb, pairs.n_unmatched_a, pairs.n_unmatched_b,
                           report};
  if (!out_path.empty()) write_text_file(out_path, write_reliability_csv({row}));
  out << "session " << set.meta.session_id << ": " << sa.str() << " vs " << sb.str() << '\n'
      << "  pairs:              " << report.n_pairs << '\n'
      << "  unmatched:          " << pairs.n_unmatched_a << " / " << pairs.n_unmatched_b << '\n'
      << "  percent agreement:  " << csv::format_double(report.percent_agreement) << '\n'
      << "  cohen's kappa:      " << csv::format_double(report.kappa) << '\n';
  return kExitOk;
}

int cmd_survey(const std::string& file, const std::string& scale_flag,
               const std::string& out_path, const CliConfig& cfg, std::ostream& out) {
  std::filesystem::path scale_path = scale_flag;
  if (scale_path.empty()) {
    if (!cfg.scale_path) throw UsageError("survey needs --scale or a 'scale' config entry");
    scale_path = *cfg.scale_path;
  }
  const auto scale = ScaleDefinition::parse(read_text_file(scale_path));
  const auto survey = parse_survey_file(read_text_file(file), scale);
  std::vector<BondingMeasure> measures;
  measures.reserve(survey.records.size());
  for (const auto& r : survey.records) measures.push_back(bonding_measure(r, scale));
  emit(write_bonding_csv(measures), out_path, out);
  return kExitOk;
}

int cmd_join(const std::string& metrics_path, const std::string& bonding_path,
             const std::string& link_path, const std::string& slice_flag, bool aggregate,
             const std::string& out_path, std::ostream& out, std::ostream& err) {
  auto metrics = parse_metrics_csv(read_text_file(metrics_path));
  if (const auto only = parse_slice_flag(slice_flag)) {
    std::erase_if(metrics, [&](const MetricsRow& r) {
      return r.coder_id != only->coder_id || r.pass_id != only->pass_id;
    });
  }
  const auto bonding = parse_bonding_csv(read_text_file(bonding_path));
  const auto link = LinkTable::parse(read_text_file(link_path));
  auto joined = join_triangulated(metrics, bonding, link);
  for (const auto& [s, t] : joined.report.unmatched_metrics) {
    err << "warning: track " << s << "/" << t << " has no linked participant\n";
  }
  for (const auto& [s, p] : joined.report.unmatched_bonding) {
    err << "warning: participant " << s << "/" << p << " has no linked track\n";
  }
  const auto table = aggregate ? aggregate_by_session(joined.table) : std::move(joined.table);
  for (const auto& v : table.unstandardized) {
    err << "warning: " << v << " could not be standardized\n";
  }
  emit(write_triangulated_csv(table), out_path, out);
  return kExitOk;
}

int cmd_correlate(const std::string& file, const std::string& spec, const std::string& out_path,
                  std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, std::string>> pairs;
  try {
    pairs = parse_pair_spec(spec);
  } catch (const Error& e) {
    throw UsageError(e.detail());
  }
  const auto table = parse_triangulated_csv(read_text_file(file));
  const auto report = correlation_report(table, pairs);
  for (const auto& [pair, reason] : report.skipped) {
    err << "warning: skipped " << pair << ": " << reason << '\n';
  }
  emit(write_correlation_csv(report), out_path, out);
  return kExitOk;
}

int cmd_generate(const CliConfig& cfg, std::optional<int> sessions, const std::string& out_dir,
                 std::ostream& out) {
  auto config = cfg.generator;
  if (sessions) config.n_sessions = *sessions;
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto corpus = generate_corpus(config, config.n_sessions);
  write_study(out_dir, config, corpus);
  std::size_t participants = 0;
  for (const auto& s : corpus) participants += s.survey.size();
  out << "wrote " << corpus.size() << " sessions (" << participants << " participants) to "
      << out_dir << '\n';
  return kExitOk;
}

int cmd_serve(const std::string& frames, const std::string& host, int port, std::ostream& out) {
  AnnotationService service(std::filesystem::absolute(frames));
  http::ApiServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
  out << "serving " << frames << " on http://" << host << ":" << bound << '\n' << std::flush;
  return server.listen_after_bind() ? kExitOk : kExitInvalid;
}

}  // namespace

CliConfig CliConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  CliConfig cfg;
  const auto kv = KeyValueFile::parse(text);
  for (const auto& [key, entry] : kv.entries()) {
    const auto& value = entry.value;
    try {
      if (key == "smoothing_window") {
        cfg.metrics.smoothing_window = parse_config_int(key, value);
      } else if (key == "max_smoothing_iterations") {
        cfg.metrics.max_smoothing_iterations = parse_config_int(key, value);
      } else if (key == "tie_break") {
        cfg.metrics.tie_break = parse_tie_break(value);
      } else if (key == "denominator") {
        cfg.metrics.denominator = parse_denominator(value);
      } else if (key == "transitions_include_offscreen") {
        if (value != "true" && value != "false") {
          throw Error(Errc::InvalidConfig, key + " must be true or false");
        }
        cfg.metrics.transitions_include_offscreen = value == "true";
      } else if (key == "scale") {
        const std::filesystem::path p(value);
        cfg.scale_path = p.is_relative() ? base_dir / p : p;
      } else if (!cfg.generator.apply(key, value)) {
        throw Error(Errc::InvalidConfig, "unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw Error(Errc::InvalidConfig, e.detail(), entry.line);
    }
  }
  const int w = cfg.metrics.smoothing_window;
  if (w != 0 && (w < 3 || w % 2 == 0)) {
    throw Error(Errc::InvalidConfig, "smoothing_window must be 0 or an odd number >= 3");
  }
  if (cfg.metrics.max_smoothing_iterations < 0) {
    throw Error(Errc::InvalidConfig, "max_smoothing_iterations must be >= 0");
  }
  return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proxemics and bonding analysis toolkit", "proxkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "proxkit 0.1.0");

  Common common;
  std::vector<std::string> files;
  std::string file, out_path, slice, a, b, scale, metrics_path, bonding_path, link_path;
  std::string pairs = "all", out_dir, frames, host = "127.0.0.1";
  std::optional<int> sessions;
  int port = 8080;
  bool aggregate = false;

  auto* validate = app.add_subcommand("validate", "check annotation files and their sidecars");
  validate->add_option("annotation", files, "annotation CSV files")->required();

  auto* metrics = app.add_subcommand("metrics", "per-track proxemics metrics");
  metrics->add_option("annotation", files, "annotation CSV files")->required();
  metrics->add_option("--out", out_path, "metrics CSV (stdout when omitted)");
  metrics->add_option("--slice", slice, "only this coder:pass");
  add_config_flag(metrics, common);
  add_metrics_flags(metrics, common);

  auto* reliability = app.add_subcommand("reliability", "Cohen's kappa between two slices");
  reliability->add_option("annotation", file, "annotation CSV")->required();
  reliability->add_option("--a", a, "first coder:pass")->required();
  reliability->add_option("--b", b, "second coder:pass")->required();
  reliability->add_option("--out", out_path, "reliability CSV");

  auto* survey = app.add_subcommand("survey", "score surveys into bonding measures");
  survey->add_option("survey", file, "survey CSV")->required();
  survey->add_option("--scale", scale, "scale definition file");
  survey->add_option("--out", out_path, "bonding CSV (stdout when omitted)");
  add_config_flag(survey, common);

  auto* join = app.add_subcommand("join", "link metrics and bonding into one table");
  join->add_option("--metrics", metrics_path, "metrics CSV")->required();
  join->add_option("--bonding", bonding_path, "bonding CSV")->required();
  join->add_option("--link", link_path, "participant/track link CSV")->required();
  join->add_option("--slice", slice, "use only this coder:pass from the metrics");
  join->add_flag("--aggregate", aggregate, "one row per session (means)");
  join->add_option("--out", out_path, "table CSV (stdout when omitted)");

  auto* correlate = app.add_subcommand("correlate", "Pearson and Spearman over a joined table");
  correlate->add_option("table", file, "joined table CSV")->required();
  correlate->add_option("--pairs", pairs, "x:y[,x:y...] or all")->capture_default_str();
  correlate->add_option("--out", out_path, "correlation CSV (stdout when omitted)");

  auto* generate = app.add_subcommand("generate", "write a synthetic study");
  add_config_flag(generate, common);
  generate->add_option("--sessions", sessions, "number of sessions (overrides n_sessions)");
  generate->add_option("--out-dir", out_dir, "study directory")->required();

  auto* serve = app.add_subcommand("serve", "run the annotation HTTP service");
  serve->add_option("--frames", frames, "directory with one frame folder per session")
      ->required();
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--host", host, "bind address")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(files, out, err);
    if (*metrics) return cmd_metrics(files, slice, out_path, resolve(common), out, err);
    if (*reliability) return cmd_reliability(file, a, b, out_path, out);
    if (*survey) return cmd_survey(file, scale, out_path, resolve(common), out);
    if (*join) {
      return cmd_join(metrics_path, bonding_path, link_path, slice, aggregate, out_path, out, err);
    }
    if (*correlate) return cmd_correlate(file, pairs, out_path, out, err);
    if (*generate) return cmd_generate(resolve(common), sessions, out_dir, out);
    if (*serve) return cmd_serve(frames, host, port, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitUsage;
}

}  // namespace proxkit::cli
