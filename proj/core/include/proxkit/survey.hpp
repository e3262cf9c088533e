#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace proxkit {

/// Item layout of the (modified) Group Attitude Scale in use.
struct ScaleDefinition {
  int item_count = 1;
  int likert_min = 1;
  int likert_max = 9;
  std::set<int> reversed_items;  // 1-based

  /// Throws Error(InvalidScale).
  void validate() const;
  /// `items`, `likert_min`, `likert_max`, optional `reversed` (comma list).
  static ScaleDefinition parse(std::string_view text);
  std::string write() const;
};

/// Canvas entity ids: `self`, `agent`, or `member-<k>` with k >= 1.
bool is_canvas_entity(std::string_view id) noexcept;

struct CanvasPlacement {
  std::string entity_id;
  double x_mm = 0;
  double y_mm = 0;

  bool operator==(const CanvasPlacement&) const = default;
};

struct SurveyRecord {
  std::string participant_id;
  std::string session_id;
  std::vector<int> gas_responses;
  std::vector<CanvasPlacement> placements;
  std::string demographics;  // opaque pass-through
  double canvas_width_mm = 0;
  double canvas_height_mm = 0;

  const CanvasPlacement* find(std::string_view entity) const noexcept;
  bool operator==(const SurveyRecord&) const = default;
};

struct SurveyFile {
  double canvas_width_mm = 0;
  double canvas_height_mm = 0;
  std::vector<SurveyRecord> records;
};

/// Parses the survey export. Errors carry the offending line:
/// MissingHeader, MalformedRow, ResponseOutOfRange, MissingSelfPlacement,
/// DuplicatePlacement, BadPlacementCoordinate.
SurveyFile parse_survey_file(std::string_view text, const ScaleDefinition& scale);
std::string write_survey_file(const SurveyFile& file, const ScaleDefinition& scale);

/// Maps a reversed item's response r to likert_min + likert_max - r.
int reverse_response(int response, const ScaleDefinition& scale) noexcept;

/// Mean of the reverse-corrected responses. Throws Error(ResponseOutOfRange)
/// when the record does not fit the scale.
double score_gas(const SurveyRecord& record, const ScaleDefinition& scale);

struct BondingMeasure {
  std::string participant_id;
  std::string session_id;
  double distance_to_agent_mm = 0;
  std::map<std::string, double> distances_to_members_mm;
  std::optional<double> gas_score;
};

/// Euclidean self->agent and self->member distances in mm; smaller means a
/// closer reported bond. Throws Error(MissingAgentPlacement) or
/// Error(MissingSelfPlacement).
BondingMeasure canvas_bonding(const SurveyRecord& record);

/// canvas_bonding plus the GAS score.
BondingMeasure bonding_measure(const SurveyRecord& record, const ScaleDefinition& scale);

inline constexpr std::string_view kBondingHeader =
    "participant_id,session_id,gas_score,distance_to_agent_mm,mean_distance_to_members_mm";

std::string write_bonding_csv(const std::vector<BondingMeasure>& measures);
/// Reads gas_score and distance_to_agent_mm back; member distances are not
/// stored individually.
std::vector<BondingMeasure> parse_bonding_csv(std::string_view text);

}  // namespace proxkit
