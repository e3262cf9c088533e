#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxkit/error.hpp"
#include "proxkit/zone.hpp"

namespace proxkit {

enum class AgentType { Robot, Virtual };

std::string_view agent_type_name(AgentType t) noexcept;
std::optional<AgentType> agent_type_from_name(std::string_view name) noexcept;

/// Identifiers (session, coder, track, participant) are non-empty runs of
/// [A-Za-z0-9_.-]. Commas, colons, quotes and whitespace are excluded so the
/// tokens embed safely in CSV cells and `coder:pass` flags.
bool is_token(std::string_view s) noexcept;

struct SessionMeta {
  std::string session_id;
  AgentType agent_type = AgentType::Robot;
  int group_size = 1;
  int frame_stride = 4;
  double frames_per_second = 25.0;  // only converts frame counts to seconds
  std::pair<int, int> grid_cm{150, 150};

  bool operator==(const SessionMeta&) const = default;
};

struct RecordKey {
  std::string coder_id;
  int pass_id = 1;
  std::int64_t frame_index = 0;
  std::string track_id;

  auto operator<=>(const RecordKey&) const = default;
  bool operator==(const RecordKey&) const = default;
};

struct AnnotationRecord {
  std::string coder_id;
  int pass_id = 1;
  std::int64_t frame_index = 0;
  std::string track_id;
  Zone zone = Zone::OffScreen;
  std::string note;  // empty when the coder left none

  RecordKey key() const { return {coder_id, pass_id, frame_index, track_id}; }
  bool operator==(const AnnotationRecord&) const = default;
};

struct AnnotationSet {
  SessionMeta meta;
  std::vector<AnnotationRecord> records;

  bool operator==(const AnnotationSet&) const = default;
};

/// Sorts records into canonical (coder, pass, frame, track) order.
void canonicalize(AnnotationSet& set);

struct Issue {
  std::optional<std::size_t> record;  // index into AnnotationSet::records
  Errc code = Errc::InvalidSet;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Lists every invariant violation of `set`. Never throws.
ValidationReport validate_annotation_set(const AnnotationSet& set);

inline constexpr std::string_view kAnnotationHeader =
    "coder_id,pass_id,frame_index,track_id,zone,note";

/// Parses the annotation CSV. The returned records are in canonical order.
/// Throws Error with the offending line for MissingHeader, MalformedRow,
/// UnknownZoneCode, DuplicateKey, NonMonotoneStride, InvalidToken and
/// TooManyTracks.
AnnotationSet parse_annotation_file(std::string_view text, const SessionMeta& meta);

/// Canonical serialization: header, records sorted by key, LF endings,
/// non-empty notes always quoted. Throws Error(InvalidSet) if validation fails.
std::string write_annotation_file(const AnnotationSet& set);

/// Contents of the metadata sidecar.
struct SidecarFile {
  SessionMeta meta;
  std::optional<bool> partial;  // set by service exports
  std::vector<std::string> warnings;
};

/// Parses `key=value` sidecar text. `session_id`, `agent_type` and `group_size`
/// are required; `frame_stride` defaults to 4, `fps` to 25 (with a warning),
/// `grid_cm` to 150x150. Throws Error(InvalidMeta).
SidecarFile parse_session_meta(std::string_view text);

std::string write_session_meta(const SessionMeta& meta, std::optional<bool> partial = std::nullopt);

/// `demo.csv` -> `demo.csv.meta`
std::filesystem::path sidecar_path(const std::filesystem::path& annotation_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Reads an annotation CSV together with its sidecar.
struct LoadedAnnotation {
  AnnotationSet set;
  std::vector<std::string> warnings;
};
LoadedAnnotation load_annotation(const std::filesystem::path& annotation_path);
void save_annotation(const std::filesystem::path& annotation_path, const AnnotationSet& set,
                     std::optional<bool> partial = std::nullopt);

struct SliceKey {
  std::string coder_id;
  int pass_id = 1;

  /// "coder:pass"
  static SliceKey parse(std::string_view text);
  std::string str() const;

  auto operator<=>(const SliceKey&) const = default;
  bool operator==(const SliceKey&) const = default;
};

/// Distinct (coder, pass) slices present in the set, ascending.
std::vector<SliceKey> slices_of(const AnnotationSet& set);

}  // namespace proxkit
