#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "proxkit/annotation.hpp"

namespace proxkit {

struct FrameEntry {
  std::int64_t frame_index = 0;
  std::filesystem::path path;
};

/// Pre-extracted frame images of one session, in frame order.
struct FrameManifest {
  int frame_stride = 4;
  std::vector<FrameEntry> frames;
};

/// Builds a manifest from image files whose stem ends in the frame number
/// (`frame_000012.png` -> 12). Files off the stride are rejected with
/// Error(StrideMismatch).
FrameManifest scan_frame_directory(const std::filesystem::path& dir, int frame_stride);

struct LabelEvent {
  std::string coder_id;
  int pass_id = 1;
  std::int64_t frame_index = 0;
  std::string track_id;
  Zone zone = Zone::OffScreen;
  std::string note;
  std::uint64_t sequence = 0;  // assigned by the service

  RecordKey key() const { return {coder_id, pass_id, frame_index, track_id}; }
};

/// The label now current for a key, echoed after every write.
struct LabelAck {
  RecordKey key;
  Zone zone = Zone::OffScreen;
  std::string note;
  std::uint64_t sequence = 0;
};

struct NextUnit {
  bool done = false;
  std::int64_t frame_index = 0;
  std::vector<std::string> unlabeled_tracks;
};

struct TrackProgress {
  std::string track_id;
  std::int64_t labeled = 0;
  std::int64_t total = 0;
};

struct SessionExport {
  std::string csv;
  std::string sidecar;
  bool partial = true;
};

/// In-memory annotation sessions. Each session applies its writes in one
/// total order (a per-session event log); reads run concurrently, and
/// distinct sessions never contend with each other.
class AnnotationService {
 public:
  /// Relative manifest paths resolve against `frames_root`.
  explicit AnnotationService(std::filesystem::path frames_root = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Tracks default to t1..t<group_size>. Throws DuplicateSession,
  /// MissingFrameFile, StrideMismatch, InvalidMeta or InvalidArgument.
  void create_session(const SessionMeta& meta, const FrameManifest& manifest,
                      std::vector<std::string> track_ids = {});

  /// Last write wins per (coder, pass, frame, track). Throws UnknownSession,
  /// UnknownFrame, UnknownTrack or InvalidToken.
  LabelAck record_label(const std::string& session_id, LabelEvent event);

  /// Replaces the note of an existing label. Throws UnknownLabel when the key
  /// has never been labeled.
  LabelAck record_note(const std::string& session_id, const RecordKey& key, std::string note);

  /// Lowest frame with an unlabeled track for this slice, or done.
  NextUnit next_unit(const std::string& session_id, const SliceKey& slice) const;

  /// Per-track labeled/total counts; without a slice a unit counts once any
  /// slice has labeled it.
  std::vector<TrackProgress> progress(const std::string& session_id,
                                      const std::optional<SliceKey>& slice = std::nullopt) const;

  /// Canonical CSV of the current labels plus a sidecar carrying `partial`.
  SessionExport export_session(const std::string& session_id, const SliceKey& slice) const;

  std::filesystem::path frame_path(const std::string& session_id, std::int64_t frame_index) const;

  /// Every accepted write in sequence order.
  std::vector<LabelEvent> event_log(const std::string& session_id) const;

  std::vector<std::string> session_ids() const;
  const std::filesystem::path& frames_root() const noexcept { return frames_root_; }

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& session_id) const;

  std::filesystem::path frames_root_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace proxkit
