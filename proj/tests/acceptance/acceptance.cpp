// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "proxkit/annotation.hpp"
#include "proxkit/error.hpp"
#include "proxkit/proxemics.hpp"
#include "proxkit/reliability.hpp"
#include "proxkit/service.hpp"
#include "proxkit/stats.hpp"
#include "proxkit/survey.hpp"
#include "proxkit/synth.hpp"
#include "proxkit/tools/http_api.hpp"
#include "proxkit/triangulation.hpp"

namespace {

using namespace proxkit;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  /// Keeps the first failure message.
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0 = no limit
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::vector<std::string> exhaustive_length6() {
  std::vector<std::string> out;
  for (int code = 0; code < 4096; ++code) {
    std::string s;
    for (int k = 0, c = code; k < 6; ++k, c /= 4) s.push_back("ipsx"[c % 4]);
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> random_sequences(std::uint64_t seed, int count, int max_len) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_len));
    // half uniform noise, half sticky runs
    const bool sticky = rng() % 2 == 0;
    std::string s;
    char cur = "ipsx"[rng() % 4];
    for (int k = 0; k < n; ++k) {
      if (!sticky || rng() % 6 == 0) cur = "ipsx"[rng() % 4];
      s.push_back(cur);
    }
    out.push_back(s);
  }
  return out;
}

AnnotationSet single_track(const std::string& codes) {
  AnnotationSet set;
  set.meta.session_id = "acc";
  set.meta.group_size = 1;
  for (std::size_t k = 0; k < codes.size(); ++k) {
    set.records.push_back({"c1", 1, static_cast<std::int64_t>(k) * set.meta.frame_stride, "t1",
                           *zone_from_code(codes[k]), ""});
  }
  return set;
}

std::string to_codes(const std::vector<Zone>& zones) {
  std::string s;
  for (Zone z : zones) s.push_back(zone_code(z));
  return s;
}

ZoneSequence to_sequence(const std::string& codes) {
  ZoneSequence seq;
  seq.track_id = "t1";
  for (char c : codes) seq.zones.push_back(*zone_from_code(c));
  return seq;
}

// ---------------------------------------------------------------------------

Outcome metrics_oracle() {
  Outcome o;
  auto sequences = exhaustive_length6();
  const auto extra = random_sequences(0x5eed, 1000, 500);
  sequences.insert(sequences.end(), extra.begin(), extra.end());
  std::size_t checked = 0;
  for (const auto& raw : sequences) {
    const auto expect = oracle::recount(raw);
    const auto m = session_metrics(single_track(raw), {"c1", 1});
    if (expect.all_offscreen) {
      if (m.skipped.size() != 1 || !m.tracks.empty()) o.fail(raw + ": expected a skipped track");
      ++checked;
      continue;
    }
    const auto& t = m.tracks.at("t1");
    const auto& s = t.shares;
    bool ok = s.total_frames == expect.total && s.on_grid_frames == expect.on_grid &&
              zone_code(t.predominant) == expect.predominant &&
              t.transitions.raw_change_count == expect.raw_changes &&
              t.transitions.zone_transition_count == expect.zone_transitions;
    for (Zone z : kAllZones) {
      const auto it = expect.counts.find(zone_code(z));
      ok = ok && s.counts[zone_index(z)] == (it == expect.counts.end() ? 0 : it->second);
      for (Zone w : kAllZones) {
        const auto p = expect.pairs.find({zone_code(z), zone_code(w)});
        const std::int64_t want = p == expect.pairs.end() ? 0 : p->second;
        ok = ok && t.transitions.matrix[zone_index(z)][zone_index(w)] == want;
      }
    }
    ok = ok && std::abs(s.intimate - expect.intimate) <= 1e-12 &&
         std::abs(s.personal - expect.personal) <= 1e-12 &&
         std::abs(s.social - expect.social) <= 1e-12 &&
         std::abs(s.offscreen_fraction - expect.offscreen) <= 1e-12;
    if (!ok) o.fail("mismatch on '" + raw.substr(0, 40) + "'");
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " sequences";
  return o;
}

Outcome share_normalization() {
  Outcome o;
  auto sequences = exhaustive_length6();
  const auto extra = random_sequences(0xface, 1000, 500);
  sequences.insert(sequences.end(), extra.begin(), extra.end());
  double worst = 0;
  std::size_t all_x = 0;
  for (const auto& raw : sequences) {
    const auto seq = to_sequence(raw);
    const bool any_grid = raw.find_first_not_of('x') != std::string::npos;
    try {
      const auto shares = time_in_zone(seq);
      if (!any_grid) o.fail(raw + ": expected AllOffScreen");
      worst = std::max(worst, std::abs(shares.intimate + shares.personal + shares.social - 1.0));
    } catch (const Error& e) {
      if (any_grid || e.code() != Errc::AllOffScreen) o.fail(raw + ": unexpected error");
      ++all_x;
    }
    try {
      const auto m = compute_metrics(seq);
      const auto& s = m.shares;
      worst = std::max(worst, std::abs(s.intimate + s.personal + s.social - 1.0));
      if (!any_grid) o.fail(raw + ": compute_metrics accepted an all off-screen track");
    } catch (const Error& e) {
      if (any_grid || e.code() != Errc::AllOffScreen) o.fail(raw + ": unexpected error");
    }
  }
  if (worst > 1e-9) o.fail("share sum off by " + fmt(worst));
  if (o.pass) o.detail = "max |sum-1| = " + fmt(worst) + ", " + std::to_string(all_x) + " all-x";
  return o;
}

Outcome smoothing_idempotence() {
  Outcome o;
  std::size_t checked = 0;
  for (const auto& raw : exhaustive_length6()) {
    const auto seq = to_sequence(raw);
    const auto smoothed = smooth_blips(seq);
    if (smooth_blips(smoothed) != smoothed) o.fail("blip filter not idempotent on " + raw);
    if (raw.find_first_not_of('x') == std::string::npos) continue;
    const auto trimmed = trim_leading_offscreen(seq);
    if (trim_leading_offscreen(trimmed) != trimmed) o.fail("trim not idempotent on " + raw);
    const auto f = smooth_blips(trim_leading_offscreen(seq));
    if (smooth_blips(trim_leading_offscreen(f)) != f) o.fail("trim+filter not idempotent on " + raw);
    if (to_codes(f.zones) != oracle::smooth(oracle::trim_x(raw))) o.fail("oracle disagrees on " + raw);
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " on-grid sequences";
  return o;
}

Outcome kappa_checks() {
  Outcome o;
  std::mt19937_64 rng(15);

  for (int trial = 0; trial < 50; ++trial) {
    PairedLabels same;
    const int n = 1 + static_cast<int>(rng() % 200);
    for (int k = 0; k < n; ++k) {
      const auto z = static_cast<Zone>(rng() % (1 + trial % 4));
      same.pairs.emplace_back(z, z);
    }
    if (reliability_report(same).kappa != 1.0) o.fail("identical passes gave kappa != 1");
  }

  PairedLabels hand;
  auto add = [&](Zone a, Zone b, int n) {
    for (int k = 0; k < n; ++k) hand.pairs.emplace_back(a, b);
  };
  add(Zone::Intimate, Zone::Intimate, 20);
  add(Zone::Personal, Zone::Personal, 10);
  add(Zone::Intimate, Zone::Personal, 5);
  add(Zone::Personal, Zone::Intimate, 5);
  const double hand_k = reliability_report(hand).kappa;
  if (std::abs(hand_k - 7.0 / 15.0) > 1e-12) o.fail("hand example kappa " + fmt(hand_k));

  PairedLabels independent;
  for (int k = 0; k < 10000; ++k) {
    independent.pairs.emplace_back(static_cast<Zone>(rng() % 4), static_cast<Zone>(rng() % 4));
  }
  const double ind_k = reliability_report(independent).kappa;
  if (!(std::abs(ind_k) < 0.05)) o.fail("independent passes kappa " + fmt(ind_k));

  for (int trial = 0; trial < 1000; ++trial) {
    PairedLabels p;
    std::vector<std::pair<char, char>> codes;
    const int n = 1 + static_cast<int>(rng() % 60);
    const auto spread = 1 + rng() % 4;
    for (int k = 0; k < n; ++k) {
      const auto a = static_cast<Zone>(rng() % spread);
      const auto b = rng() % 3 == 0 ? a : static_cast<Zone>(rng() % spread);
      p.pairs.emplace_back(a, b);
      codes.emplace_back(zone_code(a), zone_code(b));
    }
    const double k = reliability_report(p).kappa;
    if (!(k >= -1.0 && k <= 1.0)) o.fail("kappa outside [-1, 1]: " + fmt(k));
    if (std::abs(k - oracle::kappa(codes)) > 1e-12) o.fail("kappa disagrees with textbook form");
  }
  if (o.pass) o.detail = "hand 7/15, independent " + fmt(ind_k);
  return o;
}

Outcome statistics_oracles() {
  Outcome o;
  std::mt19937_64 rng(100);
  std::normal_distribution<double> noise(0, 1);
  double worst_r = 0, worst_z = 0, worst_inv = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 200);
    const double slope = noise(rng);
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
      // rounded to force ties
      const double xi = std::round(noise(rng) * 4) + 50;
      x.push_back(xi);
      y.push_back(std::round((slope * xi + noise(rng) * 3) * 2) / 2);
    }
    if (stats::is_constant(x) || stats::is_constant(y)) continue;
    const auto c = stats::correlate(x, y);
    worst_r = std::max({worst_r, std::abs(c.pearson_r - oracle::pearson(x, y)),
                        std::abs(c.spearman_rho - oracle::spearman(x, y))});

    const auto zx = stats::z_standardize(x);
    const auto zy = stats::z_standardize(y);
    worst_z = std::max({worst_z, std::abs(stats::mean(zx)), std::abs(stats::sample_sd(zx) - 1),
                        std::abs(stats::mean(zy)), std::abs(stats::sample_sd(zy) - 1)});
    worst_inv = std::max(worst_inv, std::abs(stats::pearson(zx, zy) - c.pearson_r));
  }
  if (worst_r > 1e-10) o.fail("correlation off by " + fmt(worst_r));
  if (worst_z > 1e-9) o.fail("z moments off by " + fmt(worst_z));
  if (worst_inv > 1e-10) o.fail("standardization changed r by " + fmt(worst_inv));
  if (o.pass) {
    o.detail = "max err r " + fmt(worst_r) + ", z " + fmt(worst_z) + ", inv " + fmt(worst_inv);
  }
  return o;
}

Outcome round_trip() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto set = proxkit::testing::random_set(seed);
    const auto text = write_annotation_file(set);
    const auto parsed = parse_annotation_file(text, set.meta);
    canonicalize(set);
    if (parsed != set) o.fail("parse(write(s)) != s for seed " + std::to_string(seed));
    if (write_annotation_file(parsed) != text) {
      o.fail("write(parse(t)) != t for seed " + std::to_string(seed));
    }
    const auto meta = parse_session_meta(write_session_meta(set.meta)).meta;
    if (meta != set.meta) o.fail("sidecar round trip failed for seed " + std::to_string(seed));
  }
  if (o.pass) o.detail = "100 sets byte-exact";
  return o;
}

Outcome composition() {
  Outcome o;
  const GeneratorConfig config;
  int multi = 0;
  const int n = 10000;
  for (int i = 1; i <= n; ++i) {
    if (generate_session(config, corpus_session_id(i)).annotation.meta.group_size >= 2) ++multi;
  }
  const double fraction = static_cast<double>(multi) / n;
  if (!(fraction >= 0.53 && fraction <= 0.57)) o.fail("multi-person fraction " + fmt(fraction));
  if (o.pass) o.detail = "multi-person fraction " + fmt(fraction);
  return o;
}

/// Runs the file-based pipeline on a freshly written study and returns
/// Spearman(distance_to_agent_mm, intimate_share).
double study_rho(double coupling, const std::filesystem::path& dir) {
  GeneratorConfig config;
  config.coupling = coupling;
  write_study(dir, config, generate_corpus(config, config.n_sessions));

  std::vector<MetricsRow> metrics;
  for (int i = 1; i <= config.n_sessions; ++i) {
    const auto loaded = load_annotation(dir / "sessions" / (corpus_session_id(i) + ".csv"));
    const auto rows = metrics_rows(session_metrics(loaded.set, {config.coder_id, 1}));
    metrics.insert(metrics.end(), rows.begin(), rows.end());
  }
  metrics = parse_metrics_csv(write_metrics_csv(metrics));

  const auto scale = ScaleDefinition::parse(read_text_file(dir / "scale.txt"));
  std::vector<BondingMeasure> bonding;
  for (const auto& r : parse_survey_file(read_text_file(dir / "survey.csv"), scale).records) {
    bonding.push_back(bonding_measure(r, scale));
  }
  bonding = parse_bonding_csv(write_bonding_csv(bonding));

  const auto link = LinkTable::parse(read_text_file(dir / "link.csv"));
  const auto joined = join_triangulated(metrics, bonding, link);
  const auto report =
      correlation_report(joined.table, {{"distance_to_agent_mm", "intimate_share"}});
  if (report.entries.size() != 1) throw Error(Errc::InvalidArgument, "correlation skipped");
  return report.entries.front().spearman_rho;
}

Outcome end_to_end() {
  Outcome o;
  proxkit::testing::TempDir dir("acceptance");
  const double rho1 = study_rho(1.0, dir.path() / "c1");
  const double rho1_again = study_rho(1.0, dir.path() / "c1b");
  const double rho0 = study_rho(0.0, dir.path() / "c0");
  if (!(std::abs(rho1) >= 0.6)) o.fail("coupling 1 rho " + fmt(rho1));
  if (!(std::abs(rho0) < 0.1)) o.fail("coupling 0 rho " + fmt(rho0));
  if (rho1 != rho1_again) o.fail("same seed gave different rho");
  for (const char* f : {"survey.csv", "link.csv", "sessions/s0187.csv"}) {
    if (read_text_file(dir.path() / "c1" / f) != read_text_file(dir.path() / "c1b" / f)) {
      o.fail(std::string("same seed wrote different ") + f);
    }
  }
  if (o.pass) o.detail = "rho(coupling 1) " + fmt(rho1) + ", rho(coupling 0) " + fmt(rho0);
  return o;
}

Outcome service_replay() {
  using nlohmann::json;
  Outcome o;
  proxkit::testing::TempDir dir("replay");
  std::filesystem::create_directories(dir.path() / "r1");
  for (int i = 0; i < 40; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%04d.jpg", i * 4);
    std::ofstream(dir.path() / "r1" / name) << i;
  }
  AnnotationService service(dir.path());
  http::ApiServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  if (port < 0) {
    o.fail("cannot bind a local port");
    return o;
  }
  std::thread serving([&] { server.listen_after_bind(); });
  httplib::Client client("127.0.0.1", port);

  auto create = client.Post(
      "/sessions",
      json{{"meta", {{"session_id", "r1"}, {"group_size", 3}, {"agent_type", "virtual"}}}}.dump(),
      "application/json");
  if (!create || create->status != 201) o.fail("session creation failed");

  // 110 distinct units, then 10 overwrites: 120 label events.
  std::mt19937_64 rng(120);
  std::vector<RecordKey> units;
  for (int f = 0; f < 40; ++f) {
    for (const char* t : {"t1", "t2", "t3"}) units.push_back({"c1", 1, f * 4, t});
  }
  std::shuffle(units.begin(), units.end(), rng);
  units.resize(110);
  std::vector<std::pair<RecordKey, Zone>> events;
  for (const auto& k : units) events.emplace_back(k, static_cast<Zone>(rng() % 4));
  for (int k = 0; k < 10; ++k) {
    const auto& key = units[rng() % units.size()];
    events.emplace_back(key, static_cast<Zone>(rng() % 4));
  }

  std::map<RecordKey, Zone> model;
  for (const auto& [key, zone] : events) {
    model[key] = zone;
    const json body{{"coder_id", key.coder_id}, {"pass_id", key.pass_id},
                    {"frame_index", key.frame_index}, {"track_id", key.track_id},
                    {"zone", std::string(1, zone_code(zone))}};
    const auto r = client.Post("/sessions/r1/labels", body.dump(), "application/json");
    if (!r || r->status != 200) o.fail("label request failed");
  }

  AnnotationSet expected;
  expected.meta.session_id = "r1";
  expected.meta.group_size = 3;
  expected.meta.agent_type = AgentType::Virtual;
  for (const auto& [key, zone] : model) {
    expected.records.push_back({key.coder_id, key.pass_id, key.frame_index, key.track_id, zone, ""});
  }
  const auto exported = client.Get("/sessions/r1/export?coder=c1&pass=1");
  server.stop();
  serving.join();

  if (events.size() != 120 || model.size() != 110) o.fail("replay script is malformed");
  if (!exported || exported->status != 200) {
    o.fail("export request failed");
    return o;
  }
  if (exported->body != write_annotation_file(expected)) o.fail("export differs from model");
  if (exported->get_header_value("X-Proxkit-Partial") != "true") o.fail("partial flag missing");
  if (o.pass) o.detail = "120 events, 110 units, export byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"metrics_oracle_equivalence", 5.0, metrics_oracle},
      {"share_normalization", 0, share_normalization},
      {"smoothing_idempotence", 0, smoothing_idempotence},
      {"kappa", 0, kappa_checks},
      {"statistics_oracles", 0, statistics_oracles},
      {"annotation_round_trip", 0, round_trip},
      {"composition_reproduction", 10.0, composition},
      {"end_to_end_planted_signal", 30.0, end_to_end},
      {"service_replay", 0, service_replay},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      outcome.fail("took " + fmt(secs) + " s, limit " + fmt(c.time_limit_s) + " s");
    }
    if (!outcome.pass) ++failed;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << c.name << " (" << outcome.detail << "; "
              << fmt(secs) << " s)\n";
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
