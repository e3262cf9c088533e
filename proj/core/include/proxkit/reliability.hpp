#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxkit/annotation.hpp"
#include "proxkit/zone.hpp"

namespace proxkit {

using ConfusionMatrix = std::array<std::array<std::int64_t, kZoneCount>, kZoneCount>;

/// Labels from two slices aligned on (frame_index, track_id), in key order.
struct PairedLabels {
  std::vector<std::pair<Zone, Zone>> pairs;
  std::size_t n_unmatched_a = 0;
  std::size_t n_unmatched_b = 0;

  std::size_t n_aligned() const noexcept { return pairs.size(); }
};

struct ReliabilityReport {
  std::int64_t n_pairs = 0;
  double percent_agreement = 0;  // p_o
  double expected_agreement = 0; // p_e from the two marginals
  double kappa = 0;
  ConfusionMatrix confusion{};   // [zone_a][zone_b]
};

/// Throws Error(InvalidArgument) when a == b, Error(EmptySlice) when either
/// slice has no records and Error(NoOverlap) when nothing aligns.
PairedLabels pair_labels(const AnnotationSet& set, const SliceKey& a, const SliceKey& b);

/// Cohen's kappa over all four codes, off-screen included. When chance
/// agreement is 1 (both sides constant on the same code) kappa is 1.
/// Throws Error(NoPairs) on empty input.
ReliabilityReport reliability_report(const PairedLabels& pairs);

struct ReliabilityRow {
  std::string session_id;
  SliceKey slice_a;
  SliceKey slice_b;
  std::size_t n_unmatched_a = 0;
  std::size_t n_unmatched_b = 0;
  ReliabilityReport report;
};

inline constexpr std::string_view kReliabilityHeader =
    "session_id,slice_a,slice_b,n_pairs,n_unmatched_a,n_unmatched_b,percent_agreement,kappa";

std::string write_reliability_csv(const std::vector<ReliabilityRow>& rows);

}  // namespace proxkit
