#include "proxkit/error.hpp"

namespace proxkit {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownZoneCode: return "UnknownZoneCode";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::NonMonotoneStride: return "NonMonotoneStride";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::InvalidMeta: return "InvalidMeta";
    case Errc::InvalidToken: return "InvalidToken";
    case Errc::TooManyTracks: return "TooManyTracks";
    case Errc::InvalidSet: return "InvalidSet";
    case Errc::AllOffScreen: return "AllOffScreen";
    case Errc::UnknownCoderPass: return "UnknownCoderPass";
    case Errc::EmptySlice: return "EmptySlice";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::NoPairs: return "NoPairs";
    case Errc::InvalidScale: return "InvalidScale";
    case Errc::MissingSelfPlacement: return "MissingSelfPlacement";
    case Errc::MissingAgentPlacement: return "MissingAgentPlacement";
    case Errc::DuplicatePlacement: return "DuplicatePlacement";
    case Errc::ResponseOutOfRange: return "ResponseOutOfRange";
    case Errc::BadPlacementCoordinate: return "BadPlacementCoordinate";
    case Errc::DuplicateLinkKey: return "DuplicateLinkKey";
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::ConstantColumn: return "ConstantColumn";
    case Errc::TooFewValues: return "TooFewValues";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ConstantInput: return "ConstantInput";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DuplicateSession: return "DuplicateSession";
    case Errc::MissingFrameFile: return "MissingFrameFile";
    case Errc::StrideMismatch: return "StrideMismatch";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::UnknownFrame: return "UnknownFrame";
    case Errc::UnknownTrack: return "UnknownTrack";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string compose(Errc code, const std::string& message, std::optional<std::size_t> line) {
  std::string out{errc_name(code)};
  if (line) {
    out += ": line " + std::to_string(*line);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(compose(code, message, line)), code_(code), line_(line), detail_(message) {}

}  // namespace proxkit
