#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxkit/proxemics.hpp"
#include "proxkit/stats.hpp"
#include "proxkit/survey.hpp"

namespace proxkit {

/// Manual participant <-> track mapping.
struct LinkRow {
  std::string session_id;
  std::string participant_id;
  std::string track_id;

  bool operator==(const LinkRow&) const = default;
};

struct LinkTable {
  std::vector<LinkRow> rows;

  /// Throws Error(DuplicateLinkKey) if (session, participant) or
  /// (session, track) repeats.
  void validate() const;
  static LinkTable parse(std::string_view text);
  std::string write() const;
};

inline constexpr std::string_view kLinkHeader = "session_id,participant_id,track_id";

/// Behavioural variables first, then self-report ones.
inline constexpr std::string_view kProximityVariables[] = {
    "intimate_share", "personal_share", "social_share", "offscreen_fraction",
    "zone_transitions", "raw_changes", "observed_seconds"};
inline constexpr std::string_view kBondingVariables[] = {"gas_score", "distance_to_agent_mm"};

struct TriangulatedRow {
  std::string session_id;
  std::string participant_id;
  std::string track_id;
  std::vector<double> values;  // NaN = missing
  std::vector<double> z;       // NaN where values is missing or the column is not standardizable
};

struct TriangulatedTable {
  std::vector<std::string> variables;
  std::vector<TriangulatedRow> rows;
  std::vector<std::string> unstandardized;  // variables whose z column stays empty

  std::optional<std::size_t> index_of(std::string_view variable) const;
  /// Column by name; `z_<name>` selects the standardized twin.
  std::vector<double> column(std::string_view name) const;
};

struct JoinReport {
  std::vector<std::pair<std::string, std::string>> unmatched_metrics;  // (session, track)
  std::vector<std::pair<std::string, std::string>> unmatched_bonding;  // (session, participant)

  bool empty() const noexcept { return unmatched_metrics.empty() && unmatched_bonding.empty(); }
};

struct JoinResult {
  TriangulatedTable table;
  JoinReport report;
};

/// Inner join of metrics and bonding through the link table, followed by
/// z-standardization. Rows on either side that no link references end up in
/// the report. Throws Error(DuplicateLinkKey), Error(DuplicateKey) when the
/// metrics hold several slices of one track, and Error(DanglingReference)
/// when a link names a missing track or participant.
JoinResult join_triangulated(const std::vector<MetricsRow>& metrics,
                             const std::vector<BondingMeasure>& bonding, const LinkTable& link);

/// Fills every z column over its non-missing rows. Columns with fewer than
/// two values or zero variance are listed in `unstandardized`.
void standardize(TriangulatedTable& table);

/// Mean of each variable per session (one row per session, ids "*"), then
/// re-standardized.
TriangulatedTable aggregate_by_session(const TriangulatedTable& table);

std::string write_triangulated_csv(const TriangulatedTable& table);
TriangulatedTable parse_triangulated_csv(std::string_view text);

struct CorrelationEntry {
  std::string variable_x;
  std::string variable_y;
  std::size_t n = 0;
  double pearson_r = 0;
  double spearman_rho = 0;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
  std::vector<std::pair<std::string, std::string>> skipped;  // (pair, reason)
};

/// `x:y[,x:y...]`, or `all` for every proximity x bonding pair.
std::vector<std::pair<std::string, std::string>> parse_pair_spec(std::string_view spec);

/// Pairwise deletion of missing values; pairs with n < 3 or a constant side
/// are skipped with a reason. Throws Error(UnknownVariable).
CorrelationReport correlation_report(const TriangulatedTable& table,
                                     const std::vector<std::pair<std::string, std::string>>& pairs);

inline constexpr std::string_view kCorrelationHeader =
    "variable_x,variable_y,n,pearson_r,spearman_rho";

std::string write_correlation_csv(const CorrelationReport& report);

}  // namespace proxkit
