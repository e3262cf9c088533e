#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "proxkit/annotation.hpp"
#include "proxkit/zone.hpp"

namespace proxkit {

/// One track's zones in frame order, one entry per sampled frame.
struct ZoneSequence {
  std::string track_id;
  std::vector<Zone> zones;
  int frame_stride = 4;
  double frames_per_second = 25.0;

  bool operator==(const ZoneSequence&) const = default;
};

using ZoneCounts = std::array<std::int64_t, kZoneCount>;
using TransitionMatrix = std::array<std::array<std::int64_t, kZoneCount>, kZoneCount>;

enum class ShareDenominator {
  OnGrid,  // grid shares sum to 1; off-screen reported separately
  Total,   // grid shares are fractions of every frame, off-screen included
};

enum class TieBreak {
  Closest,   // Intimate > Personal > Social
  Farthest,  // Social > Personal > Intimate
};

struct ZoneShares {
  ZoneCounts counts{};
  double intimate = 0;
  double personal = 0;
  double social = 0;
  double offscreen_fraction = 0;
  std::int64_t on_grid_frames = 0;
  std::int64_t total_frames = 0;

  double share(Zone z) const noexcept;
};

struct TransitionStats {
  TransitionMatrix matrix{};        // [from][to], adjacent sampled frames
  std::int64_t zone_transition_count = 0;  // unequal pairs, both on grid
  std::int64_t raw_change_count = 0;       // every unequal pair
};

struct ProxemicsMetrics {
  ZoneShares shares;
  Zone predominant = Zone::Intimate;
  TransitionStats transitions;
  double observed_seconds = 0;
};

struct MetricsOptions {
  int smoothing_window = 3;  // odd >= 3; 0 disables the blip filter
  int max_smoothing_iterations = 10;
  TieBreak tie_break = TieBreak::Closest;
  ShareDenominator denominator = ShareDenominator::OnGrid;
  bool transitions_include_offscreen = false;
};

/// Drops the leading run of OffScreen, the coder's default state before a
/// person is first placed. Throws Error(AllOffScreen) when nothing remains.
ZoneSequence trim_leading_offscreen(ZoneSequence seq);

/// Iterated modal filter. Each pass replaces every interior element with the
/// unique mode of its centred window (ties keep the element); the first and
/// last window/2 elements never change. Passes repeat until nothing changes or
/// `max_iterations` is reached. Sequences shorter than the window come back
/// unchanged. Throws Error(InvalidArgument) for an even or < 3 window.
ZoneSequence smooth_blips(ZoneSequence seq, int window = 3, int max_iterations = 10);

/// Throws Error(AllOffScreen) when no element is on the grid.
ZoneShares time_in_zone(const ZoneSequence& seq,
                        ShareDenominator denominator = ShareDenominator::OnGrid);

/// Grid zone with the largest share. Never OffScreen. Throws
/// Error(AllOffScreen) when on_grid_frames is 0.
Zone predominant_zone(const ZoneShares& shares, TieBreak tie_break = TieBreak::Closest);

TransitionStats transition_stats(const ZoneSequence& seq, bool include_offscreen = false);

/// trim -> smooth -> shares, predominant zone, transitions, observed seconds.
ProxemicsMetrics compute_metrics(ZoneSequence seq, const MetricsOptions& options = {});

struct SkippedTrack {
  std::string track_id;
  std::string reason;
};

struct SessionMetrics {
  std::string session_id;
  SliceKey slice;
  std::map<std::string, ProxemicsMetrics> tracks;
  std::vector<SkippedTrack> skipped;
};

/// Per-track zone sequences of one (coder, pass) slice, ordered by frame.
std::map<std::string, ZoneSequence> extract_sequences(const AnnotationSet& set,
                                                      const SliceKey& slice);

/// Throws Error(UnknownCoderPass) when the slice has no records. Tracks that
/// are entirely off-screen land in `skipped`.
SessionMetrics session_metrics(const AnnotationSet& set, const SliceKey& slice,
                               const MetricsOptions& options = {});

/// One row of the metrics export.
struct MetricsRow {
  std::string session_id;
  std::string coder_id;
  int pass_id = 1;
  std::string track_id;
  double intimate = 0;
  double personal = 0;
  double social = 0;
  double offscreen_fraction = 0;
  std::int64_t on_grid_frames = 0;
  std::int64_t total_frames = 0;
  Zone predominant = Zone::Intimate;
  std::int64_t zone_transitions = 0;
  std::int64_t raw_changes = 0;
  double observed_seconds = 0;

  bool operator==(const MetricsRow&) const = default;
};

inline constexpr std::string_view kMetricsHeader =
    "session_id,coder_id,pass_id,track_id,intimate_share,personal_share,social_share,"
    "offscreen_fraction,on_grid_frames,total_frames,predominant_zone,zone_transitions,"
    "raw_changes,observed_seconds";

std::vector<MetricsRow> metrics_rows(const SessionMetrics& metrics);
std::string write_metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

}  // namespace proxkit
