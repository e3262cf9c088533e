#include "proxkit/proxemics.hpp"

#include <algorithm>

#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"

namespace proxkit {

double ZoneShares::share(Zone z) const noexcept {
  switch (z) {
    case Zone::Intimate: return intimate;
    case Zone::Personal: return personal;
    case Zone::Social: return social;
    case Zone::OffScreen: return offscreen_fraction;
  }
  return 0;
}

ZoneSequence trim_leading_offscreen(ZoneSequence seq) {
  const auto first = std::find_if(seq.zones.begin(), seq.zones.end(), on_grid);
  if (first == seq.zones.end()) {
    throw Error(Errc::AllOffScreen, "track '" + seq.track_id + "' is off-screen in every frame");
  }
  seq.zones.erase(seq.zones.begin(), first);
  return seq;
}

namespace {

bool modal_pass(const std::vector<Zone>& in, std::vector<Zone>& out, std::size_t half) {
  out = in;
  bool changed = false;
  ZoneCounts counts{};
  for (std::size_t k = 0; k < 2 * half + 1; ++k) ++counts[zone_index(in[k])];

  for (std::size_t i = half;; ++i) {
    const auto best = std::max_element(counts.begin(), counts.end());
    if (std::count(counts.begin(), counts.end(), *best) == 1) {
      const auto mode = static_cast<Zone>(best - counts.begin());
      if (mode != in[i]) {
        out[i] = mode;
        changed = true;
      }
    }
    if (i + half + 1 >= in.size()) break;
    --counts[zone_index(in[i - half])];
    ++counts[zone_index(in[i + half + 1])];
  }
  return changed;
}

}  // namespace

ZoneSequence smooth_blips(ZoneSequence seq, int window, int max_iterations) {
  if (window < 3 || window % 2 == 0) {
    throw Error(Errc::InvalidArgument, "smoothing window must be odd and >= 3");
  }
  if (max_iterations < 0) {
    throw Error(Errc::InvalidArgument, "max_iterations must be >= 0");
  }
  const auto w = static_cast<std::size_t>(window);
  if (seq.zones.size() < w) return seq;

  std::vector<Zone> next;
  for (int it = 0; it < max_iterations; ++it) {
    if (!modal_pass(seq.zones, next, w / 2)) break;
    seq.zones.swap(next);
  }
  return seq;
}

ZoneShares time_in_zone(const ZoneSequence& seq, ShareDenominator denominator) {
  ZoneShares s;
  for (Zone z : seq.zones) ++s.counts[zone_index(z)];
  s.total_frames = static_cast<std::int64_t>(seq.zones.size());
  s.on_grid_frames = s.total_frames - s.counts[zone_index(Zone::OffScreen)];
  if (s.on_grid_frames == 0) {
    throw Error(Errc::AllOffScreen, "track '" + seq.track_id + "' has no on-grid frames");
  }
  const auto denom = static_cast<double>(
      denominator == ShareDenominator::OnGrid ? s.on_grid_frames : s.total_frames);
  s.intimate = static_cast<double>(s.counts[0]) / denom;
  s.personal = static_cast<double>(s.counts[1]) / denom;
  s.social = static_cast<double>(s.counts[2]) / denom;
  s.offscreen_fraction =
      static_cast<double>(s.counts[3]) / static_cast<double>(s.total_frames);
  return s;
}

Zone predominant_zone(const ZoneShares& shares, TieBreak tie_break) {
  if (shares.on_grid_frames < 1) {
    throw Error(Errc::AllOffScreen, "predominant zone undefined without on-grid frames");
  }
  // Scan in priority order; only a strictly larger share displaces the leader.
  std::array<Zone, 3> order = kGridZones;
  if (tie_break == TieBreak::Farthest) std::reverse(order.begin(), order.end());
  Zone best = order[0];
  for (Zone z : order) {
    if (shares.share(z) > shares.share(best)) best = z;
  }
  return best;
}

TransitionStats transition_stats(const ZoneSequence& seq, bool include_offscreen) {
  TransitionStats t;
  for (std::size_t i = 1; i < seq.zones.size(); ++i) {
    const Zone from = seq.zones[i - 1];
    const Zone to = seq.zones[i];
    ++t.matrix[zone_index(from)][zone_index(to)];
    if (from != to) {
      ++t.raw_change_count;
      if (include_offscreen || (on_grid(from) && on_grid(to))) ++t.zone_transition_count;
    }
  }
  return t;
}

ProxemicsMetrics compute_metrics(ZoneSequence seq, const MetricsOptions& options) {
  seq = trim_leading_offscreen(std::move(seq));
  if (options.smoothing_window != 0) {
    seq = smooth_blips(std::move(seq), options.smoothing_window, options.max_smoothing_iterations);
  }
  ProxemicsMetrics m;
  m.shares = time_in_zone(seq, options.denominator);
  m.predominant = predominant_zone(m.shares, options.tie_break);
  m.transitions = transition_stats(seq, options.transitions_include_offscreen);
  m.observed_seconds = static_cast<double>(m.shares.total_frames) * seq.frame_stride /
                       seq.frames_per_second;
  return m;
}

std::map<std::string, ZoneSequence> extract_sequences(const AnnotationSet& set,
                                                      const SliceKey& slice) {
  std::map<std::string, std::vector<const AnnotationRecord*>> by_track;
  for (const auto& r : set.records) {
    if (r.coder_id == slice.coder_id && r.pass_id == slice.pass_id) {
      by_track[r.track_id].push_back(&r);
    }
  }
  std::map<std::string, ZoneSequence> out;
  for (auto& [track, recs] : by_track) {
    std::sort(recs.begin(), recs.end(),
              [](const auto* a, const auto* b) { return a->frame_index < b->frame_index; });
    ZoneSequence seq;
    seq.track_id = track;
    seq.frame_stride = set.meta.frame_stride;
    seq.frames_per_second = set.meta.frames_per_second;
    seq.zones.reserve(recs.size());
    for (const auto* r : recs) seq.zones.push_back(r->zone);
    out.emplace(track, std::move(seq));
  }
  return out;
}

SessionMetrics session_metrics(const AnnotationSet& set, const SliceKey& slice,
                               const MetricsOptions& options) {
  auto sequences = extract_sequences(set, slice);
  if (sequences.empty()) {
    throw Error(Errc::UnknownCoderPass,
                "no records for slice " + slice.str() + " in session " + set.meta.session_id);
  }
  SessionMetrics out;
  out.session_id = set.meta.session_id;
  out.slice = slice;
  for (auto& [track, seq] : sequences) {
    try {
      out.tracks.emplace(track, compute_metrics(std::move(seq), options));
    } catch (const Error& e) {
      if (e.code() != Errc::AllOffScreen) throw;
      out.skipped.push_back({track, std::string(e.what())});
    }
  }
  return out;
}

std::vector<MetricsRow> metrics_rows(const SessionMetrics& metrics) {
  std::vector<MetricsRow> rows;
  rows.reserve(metrics.tracks.size());
  for (const auto& [track, m] : metrics.tracks) {
    MetricsRow row;
    row.session_id = metrics.session_id;
    row.coder_id = metrics.slice.coder_id;
    row.pass_id = metrics.slice.pass_id;
    row.track_id = track;
    row.intimate = m.shares.intimate;
    row.personal = m.shares.personal;
    row.social = m.shares.social;
    row.offscreen_fraction = m.shares.offscreen_fraction;
    row.on_grid_frames = m.shares.on_grid_frames;
    row.total_frames = m.shares.total_frames;
    row.predominant = m.predominant;
    row.zone_transitions = m.transitions.zone_transition_count;
    row.raw_changes = m.transitions.raw_change_count;
    row.observed_seconds = m.observed_seconds;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out{kMetricsHeader};
  out.push_back('\n');
  for (const auto& r : rows) {
    out += csv::join_line({r.session_id, r.coder_id, std::to_string(r.pass_id), r.track_id,
                           csv::format_double(r.intimate), csv::format_double(r.personal),
                           csv::format_double(r.social), csv::format_double(r.offscreen_fraction),
                           std::to_string(r.on_grid_frames), std::to_string(r.total_frames),
                           std::string(1, zone_code(r.predominant)),
                           std::to_string(r.zone_transitions), std::to_string(r.raw_changes),
                           csv::format_double(r.observed_seconds)});
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  const auto rows = csv::read(text);
  if (rows.empty() || csv::join_line(rows.front().fields) != std::string(kMetricsHeader) + "\n") {
    throw Error(Errc::MissingHeader, "metrics file must start with the metrics header", 1);
  }
  std::vector<MetricsRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto line = rows[i].line;
    if (f.size() != 14) {
      throw Error(Errc::MalformedRow, "expected 14 fields, found " + std::to_string(f.size()),
                  line);
    }
    MetricsRow r;
    r.session_id = f[0];
    r.coder_id = f[1];
    r.pass_id = static_cast<int>(csv::parse_int(f[2], "pass_id", line));
    r.track_id = f[3];
    r.intimate = csv::parse_double(f[4], "intimate_share", line);
    r.personal = csv::parse_double(f[5], "personal_share", line);
    r.social = csv::parse_double(f[6], "social_share", line);
    r.offscreen_fraction = csv::parse_double(f[7], "offscreen_fraction", line);
    r.on_grid_frames = csv::parse_int(f[8], "on_grid_frames", line);
    r.total_frames = csv::parse_int(f[9], "total_frames", line);
    try {
      r.predominant = parse_zone(f[10]);
    } catch (const Error& e) {
      throw Error(e.code(), e.detail(), line);
    }
    r.zone_transitions = csv::parse_int(f[11], "zone_transitions", line);
    r.raw_changes = csv::parse_int(f[12], "raw_changes", line);
    r.observed_seconds = csv::parse_double(f[13], "observed_seconds", line);
    if (!is_token(r.session_id) || !is_token(r.coder_id) || !is_token(r.track_id)) {
      throw Error(Errc::InvalidToken, "identifiers must be non-empty tokens", line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace proxkit
