#include "proxkit/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"
#include "proxkit/rng.hpp"

namespace proxkit {

StochasticMatrix dwell_matrix(double self_prob) {
  StochasticMatrix m{};
  const double off = (1.0 - self_prob) / static_cast<double>(kZoneCount - 1);
  for (std::size_t r = 0; r < kZoneCount; ++r) {
    for (std::size_t c = 0; c < kZoneCount; ++c) m[r][c] = r == c ? self_prob : off;
  }
  return m;
}

StochasticMatrix blend_toward_intimate(const StochasticMatrix& base, double w) {
  StochasticMatrix m{};
  for (std::size_t r = 0; r < kZoneCount; ++r) {
    for (std::size_t c = 0; c < kZoneCount; ++c) {
      const double absorbing = c == zone_index(Zone::Intimate) ? 1.0 : 0.0;
      m[r][c] = (1.0 - w) * base[r][c] + w * absorbing;
    }
  }
  return m;
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (group_size_weights.empty()) fail("group_size_weights must not be empty");
  double total = 0;
  for (double w : group_size_weights) {
    if (!(w >= 0)) fail("group_size_weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) fail("group_size_weights must sum to 1");
  for (const auto& row : base_transition) {
    double s = 0;
    for (double p : row) {
      if (!(p >= 0)) fail("base_transition entries must be non-negative");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) fail("each base_transition row must sum to 1");
  }
  if (session_frames < 1) fail("session_frames must be >= 1");
  if (frame_stride < 1) fail("frame_stride must be >= 1");
  if (session_frames <= frame_stride) fail("session_frames must span at least two sampled frames");
  if (!(frames_per_second > 0)) fail("fps must be positive");
  if (!(coupling >= 0 && coupling <= 1)) fail("coupling must lie in [0, 1]");
  if (n_sessions < 1) fail("n_sessions must be >= 1");
  if (!(canvas_mm >= 240)) fail("canvas_mm must be >= 240 so placements fit");
  if (!(recode_rate >= 0 && recode_rate <= 1)) fail("recode_rate must lie in [0, 1]");
  if (!is_token(coder_id)) fail("coder_id must be a token");
  try {
    scale.validate();
  } catch (const Error& e) {
    fail(e.detail());
  }
}

namespace {

std::vector<double> parse_number_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : csv::split(value, ',')) {
    try {
      out.push_back(csv::parse_double(csv::trim(part), key, 0));
    } catch (const Error&) {
      throw Error(Errc::InvalidConfig, key + ": '" + part + "' is not a number");
    }
  }
  return out;
}

double parse_number(const std::string& value, const std::string& key) {
  const auto v = parse_number_list(value, key);
  if (v.size() != 1) throw Error(Errc::InvalidConfig, key + " expects one number");
  return v.front();
}

int parse_integer(const std::string& value, const std::string& key) {
  try {
    return static_cast<int>(csv::parse_int(csv::trim(value), key, 0));
  } catch (const Error&) {
    throw Error(Errc::InvalidConfig, key + ": '" + value + "' is not an integer");
  }
}

std::string join_numbers(const auto& values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ",";
    out += csv::format_double(v);
  }
  return out;
}

}  // namespace

bool GeneratorConfig::apply(const std::string& key, const std::string& value) {
  if (key == "seed") {
    const auto text = csv::trim(value);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error(Errc::InvalidConfig, "seed must be an unsigned 64-bit integer");
    }
  } else if (key == "n_sessions") {
    n_sessions = parse_integer(value, key);
  } else if (key == "coupling") {
    coupling = parse_number(value, key);
  } else if (key == "session_frames") {
    session_frames = parse_integer(value, key);
  } else if (key == "frame_stride") {
    frame_stride = parse_integer(value, key);
  } else if (key == "fps") {
    frames_per_second = parse_number(value, key);
  } else if (key == "group_size_weights") {
    group_size_weights = parse_number_list(value, key);
  } else if (key == "self_transition") {
    base_transition = dwell_matrix(parse_number(value, key));
  } else if (key == "base_transition") {
    const auto v = parse_number_list(value, key);
    if (v.size() != kZoneCount * kZoneCount) {
      throw Error(Errc::InvalidConfig, "base_transition needs 16 row-major numbers");
    }
    for (std::size_t i = 0; i < v.size(); ++i) base_transition[i / 4][i % 4] = v[i];
  } else if (key == "canvas_mm") {
    canvas_mm = parse_number(value, key);
  } else if (key == "gas_items") {
    scale.item_count = parse_integer(value, key);
  } else if (key == "gas_reversed") {
    scale.reversed_items.clear();
    if (!csv::trim(value).empty()) {
      for (const auto& part : csv::split(value, ',')) {
        scale.reversed_items.insert(parse_integer(part, key));
      }
    }
  } else if (key == "coder_id") {
    coder_id = std::string(csv::trim(value));
  } else if (key == "recode_rate") {
    recode_rate = parse_number(value, key);
  } else {
    return false;
  }
  return true;
}

std::string GeneratorConfig::write() const {
  std::ostringstream os;
  std::vector<double> flat;
  for (const auto& row : base_transition) flat.insert(flat.end(), row.begin(), row.end());
  std::string reversed;
  for (int r : scale.reversed_items) {
    if (!reversed.empty()) reversed += ",";
    reversed += std::to_string(r);
  }
  os << "seed = " << seed << '\n'
     << "n_sessions = " << n_sessions << '\n'
     << "coupling = " << csv::format_double(coupling) << '\n'
     << "session_frames = " << session_frames << '\n'
     << "frame_stride = " << frame_stride << '\n'
     << "fps = " << csv::format_double(frames_per_second) << '\n'
     << "group_size_weights = " << join_numbers(group_size_weights) << '\n'
     << "base_transition = " << join_numbers(flat) << '\n'
     << "canvas_mm = " << csv::format_double(canvas_mm) << '\n'
     << "gas_items = " << scale.item_count << '\n'
     << "gas_reversed = " << reversed << '\n'
     << "coder_id = " << coder_id << '\n'
     << "recode_rate = " << csv::format_double(recode_rate) << '\n';
  return os.str();
}

namespace {

constexpr int kMaxRedraws = 1000;

std::vector<Zone> draw_track(Rng& rng, const StochasticMatrix& transition, std::size_t units) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::vector<Zone> zones;
    zones.reserve(units);
    // Tracks open in the coder's default off-screen state.
    Zone state = Zone::OffScreen;
    for (std::size_t u = 0; u < units; ++u) {
      zones.push_back(state);
      state = static_cast<Zone>(rng.discrete(transition[zone_index(state)]));
    }
    if (std::any_of(zones.begin(), zones.end(), on_grid)) return zones;
  }
  throw Error(Errc::InvalidConfig, "transition matrix never leaves the off-screen state");
}

CanvasPlacement place_at(std::string entity, double cx, double cy, double distance, double angle) {
  return {std::move(entity), cx + distance * std::cos(angle), cy + distance * std::sin(angle)};
}

}  // namespace

SyntheticSession generate_session(const GeneratorConfig& config, const std::string& session_id) {
  config.validate();
  if (!is_token(session_id)) throw Error(Errc::InvalidConfig, "session id must be a token");
  Rng rng = Rng::substream(config.seed, session_id);

  SyntheticSession out;
  auto& meta = out.annotation.meta;
  meta.session_id = session_id;
  meta.group_size = static_cast<int>(rng.discrete(config.group_size_weights)) + 1;
  meta.agent_type = rng.below(2) == 0 ? AgentType::Robot : AgentType::Virtual;
  meta.frame_stride = config.frame_stride;
  meta.frames_per_second = config.frames_per_second;

  const auto units = static_cast<std::size_t>(
      (config.session_frames + config.frame_stride - 1) / config.frame_stride);
  const double cx = config.canvas_mm / 2;
  const double cy = config.canvas_mm / 2;
  constexpr double kTwoPi = 2 * std::numbers::pi;

  for (int member = 1; member <= meta.group_size; ++member) {
    const std::string track = "t" + std::to_string(member);
    const std::string participant = session_id + "-p" + std::to_string(member);
    const double bonding = rng.uniform01();
    out.ground_truth_bonding[track] = bonding;

    const auto transition = blend_toward_intimate(config.base_transition, config.coupling * bonding);
    const auto zones = draw_track(rng, transition, units);
    for (std::size_t u = 0; u < zones.size(); ++u) {
      out.annotation.records.push_back({config.coder_id, 1,
                                        static_cast<std::int64_t>(u) * config.frame_stride, track,
                                        zones[u], ""});
    }

    SurveyRecord rec;
    rec.participant_id = participant;
    rec.session_id = session_id;
    rec.canvas_width_mm = config.canvas_mm;
    rec.canvas_height_mm = config.canvas_mm;
    const double latent = config.scale.likert_min +
                          (config.scale.likert_max - config.scale.likert_min) * bonding;
    for (int item = 1; item <= config.scale.item_count; ++item) {
      const auto raw = static_cast<int>(std::lround(latent + rng.uniform(-1.5, 1.5)));
      const int r = std::clamp(raw, config.scale.likert_min, config.scale.likert_max);
      rec.gas_responses.push_back(config.scale.reversed_items.count(item)
                                      ? reverse_response(r, config.scale)
                                      : r);
    }
    const double distance = std::max(0.0, 100.0 * (1.0 - bonding) + rng.uniform(-5.0, 5.0));
    rec.placements.push_back({"self", cx, cy});
    rec.placements.push_back(place_at("agent", cx, cy, distance, rng.uniform(0, kTwoPi)));
    for (int other = 1; other <= meta.group_size; ++other) {
      if (other == member) continue;
      rec.placements.push_back(place_at("member-" + std::to_string(other), cx, cy,
                                        rng.uniform(20, 100), rng.uniform(0, kTwoPi)));
    }
    rec.demographics = "{\"source\":\"synthetic\"}";
    out.survey.push_back(std::move(rec));
    out.link.push_back({session_id, participant, track});
  }

  if (config.recode_rate > 0) {
    const auto first_pass = out.annotation.records;
    for (auto rec : first_pass) {
      if (rng.uniform01() < config.recode_rate) {
        const auto shift = 1 + rng.below(kZoneCount - 1);
        rec.zone = static_cast<Zone>((zone_index(rec.zone) + shift) % kZoneCount);
      }
      rec.pass_id = 2;
      out.annotation.records.push_back(std::move(rec));
    }
  }
  canonicalize(out.annotation);
  return out;
}

std::string corpus_session_id(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "s" + digits;
}

std::vector<SyntheticSession> generate_corpus(const GeneratorConfig& config, int n_sessions) {
  config.validate();
  if (n_sessions < 1) throw Error(Errc::InvalidConfig, "n_sessions must be >= 1");
  std::vector<SyntheticSession> out;
  out.reserve(static_cast<std::size_t>(n_sessions));
  for (int i = 1; i <= n_sessions; ++i) out.push_back(generate_session(config, corpus_session_id(i)));
  return out;
}

void write_study(const std::filesystem::path& dir, const GeneratorConfig& config,
                 const std::vector<SyntheticSession>& corpus) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "sessions", ec);
  if (ec) throw Error(Errc::Io, "cannot create '" + (dir / "sessions").string() + "'");

  SurveyFile survey;
  survey.canvas_width_mm = config.canvas_mm;
  survey.canvas_height_mm = config.canvas_mm;
  LinkTable link;
  std::string truth = "session_id,participant_id,track_id,bonding\n";
  for (const auto& s : corpus) {
    save_annotation(dir / "sessions" / (s.annotation.meta.session_id + ".csv"), s.annotation);
    survey.records.insert(survey.records.end(), s.survey.begin(), s.survey.end());
    link.rows.insert(link.rows.end(), s.link.begin(), s.link.end());
    for (const auto& l : s.link) {
      truth += csv::join_line({l.session_id, l.participant_id, l.track_id,
                               csv::format_double(s.ground_truth_bonding.at(l.track_id))});
    }
  }
  write_text_file(dir / "survey.csv", write_survey_file(survey, config.scale));
  write_text_file(dir / "scale.txt", config.scale.write());
  write_text_file(dir / "link.csv", link.write());
  write_text_file(dir / "ground_truth.csv", truth);
  write_text_file(dir / "generator.conf", config.write());
}

}  // namespace proxkit
