#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace proxkit {

/// Failure categories raised by the toolkit. Names are stable and appear in
/// CLI output, so scripts may match on them.
enum class Errc {
  // annotation files
  UnknownZoneCode,
  DuplicateKey,
  NonMonotoneStride,
  MissingHeader,
  MalformedRow,
  InvalidMeta,
  InvalidToken,
  TooManyTracks,
  InvalidSet,
  // metrics
  AllOffScreen,
  UnknownCoderPass,
  // reliability
  EmptySlice,
  NoOverlap,
  NoPairs,
  // survey
  InvalidScale,
  MissingSelfPlacement,
  MissingAgentPlacement,
  DuplicatePlacement,
  ResponseOutOfRange,
  BadPlacementCoordinate,
  // triangulation and statistics
  DuplicateLinkKey,
  DanglingReference,
  ConstantColumn,
  TooFewValues,
  LengthMismatch,
  ConstantInput,
  UnknownVariable,
  // generator
  InvalidConfig,
  // annotation service
  DuplicateSession,
  MissingFrameFile,
  StrideMismatch,
  UnknownSession,
  UnknownFrame,
  UnknownTrack,
  UnknownLabel,
  // general
  InvalidArgument,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  /// 1-based input line the error refers to, when it came from a file.
  std::optional<std::size_t> line() const noexcept { return line_; }
  /// The message without the code/line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace proxkit
