#include "proxkit/service.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>

#include "proxkit/error.hpp"

namespace proxkit {

namespace {

bool is_image(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".gif" ||
         ext == ".webp";
}

std::optional<std::int64_t> trailing_number(const std::string& stem) {
  std::size_t end = stem.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end || end - begin > 15) return std::nullopt;
  return std::stoll(stem.substr(begin));
}

}  // namespace

FrameManifest scan_frame_directory(const std::filesystem::path& dir, int frame_stride) {
  if (frame_stride < 1) throw Error(Errc::InvalidArgument, "frame_stride must be >= 1");
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot list '" + dir.string() + "'");

  FrameManifest m;
  m.frame_stride = frame_stride;
  std::set<std::int64_t> seen;
  for (const auto& entry : it) {
    if (!entry.is_regular_file() || !is_image(entry.path())) continue;
    const auto index = trailing_number(entry.path().stem().string());
    if (!index) continue;
    if (*index % frame_stride != 0) {
      throw Error(Errc::StrideMismatch, "frame file '" + entry.path().filename().string() +
                                            "' is off stride " + std::to_string(frame_stride));
    }
    if (!seen.insert(*index).second) {
      throw Error(Errc::InvalidArgument, "two files for frame " + std::to_string(*index));
    }
    m.frames.push_back({*index, entry.path()});
  }
  std::sort(m.frames.begin(), m.frames.end(),
            [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
  return m;
}

struct AnnotationService::Session {
  SessionMeta meta;
  std::vector<FrameEntry> frames;
  std::map<std::int64_t, std::size_t> frame_lookup;  // frame -> position in `frames`
  std::vector<std::string> tracks;

  mutable std::shared_mutex mutex;
  std::vector<LabelEvent> log;
  std::map<RecordKey, std::size_t> current;  // key -> index into log
  std::uint64_t next_sequence = 1;

  const LabelEvent& current_event(const RecordKey& k) const { return log[current.at(k)]; }
};

AnnotationService::AnnotationService(std::filesystem::path frames_root)
    : frames_root_(std::move(frames_root)) {}

AnnotationService::~AnnotationService() = default;

void AnnotationService::create_session(const SessionMeta& meta, const FrameManifest& manifest,
                                       std::vector<std::string> track_ids) {
  AnnotationSet probe{meta, {}};
  if (const auto report = validate_annotation_set(probe); !report.ok()) {
    throw Error(Errc::InvalidMeta, report.errors.front().message);
  }
  if (manifest.frame_stride != meta.frame_stride) {
    throw Error(Errc::StrideMismatch, "manifest stride " + std::to_string(manifest.frame_stride) +
                                          " differs from session stride " +
                                          std::to_string(meta.frame_stride));
  }
  if (manifest.frames.empty()) throw Error(Errc::InvalidArgument, "manifest lists no frames");

  auto session = std::make_shared<Session>();
  session->meta = meta;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    auto entry = manifest.frames[i];
    if (entry.frame_index < 0 || entry.frame_index % meta.frame_stride != 0) {
      throw Error(Errc::StrideMismatch, "frame " + std::to_string(entry.frame_index) +
                                            " is not a multiple of stride " +
                                            std::to_string(meta.frame_stride));
    }
    if (i > 0 && entry.frame_index <= manifest.frames[i - 1].frame_index) {
      throw Error(Errc::InvalidArgument, "manifest frame indices must strictly increase");
    }
    if (entry.path.is_relative() && !frames_root_.empty()) entry.path = frames_root_ / entry.path;
    if (!std::filesystem::is_regular_file(entry.path)) {
      throw Error(Errc::MissingFrameFile, "frame file '" + entry.path.string() + "' not found");
    }
    session->frame_lookup.emplace(entry.frame_index, session->frames.size());
    session->frames.push_back(std::move(entry));
  }

  if (track_ids.empty()) {
    for (int k = 1; k <= meta.group_size; ++k) track_ids.push_back("t" + std::to_string(k));
  }
  std::set<std::string> unique;
  for (const auto& t : track_ids) {
    if (!is_token(t)) throw Error(Errc::InvalidToken, "track id '" + t + "' is not a token");
    if (!unique.insert(t).second) throw Error(Errc::InvalidArgument, "track '" + t + "' repeated");
  }
  if (track_ids.size() > static_cast<std::size_t>(meta.group_size)) {
    throw Error(Errc::TooManyTracks, "more tracks than group_size");
  }
  session->tracks = std::move(track_ids);

  std::unique_lock lock(registry_mutex_);
  if (!sessions_.emplace(meta.session_id, std::move(session)).second) {
    throw Error(Errc::DuplicateSession, "session '" + meta.session_id + "' already exists");
  }
}

std::shared_ptr<AnnotationService::Session> AnnotationService::find(
    const std::string& session_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw Error(Errc::UnknownSession, "no session '" + session_id + "'");
  }
  return it->second;
}

LabelAck AnnotationService::record_label(const std::string& session_id, LabelEvent event) {
  auto s = find(session_id);
  if (!is_token(event.coder_id)) throw Error(Errc::InvalidToken, "coder_id must be a token");
  if (event.pass_id < 1) throw Error(Errc::InvalidArgument, "pass_id must be >= 1");
  if (!s->frame_lookup.count(event.frame_index)) {
    throw Error(Errc::UnknownFrame, "frame " + std::to_string(event.frame_index) +
                                        " is not in the manifest of '" + session_id + "'");
  }
  if (std::find(s->tracks.begin(), s->tracks.end(), event.track_id) == s->tracks.end()) {
    throw Error(Errc::UnknownTrack, "track '" + event.track_id + "' is not part of '" +
                                        session_id + "'");
  }

  std::unique_lock lock(s->mutex);
  event.sequence = s->next_sequence++;
  const auto key = event.key();
  s->log.push_back(std::move(event));
  s->current[key] = s->log.size() - 1;
  const auto& cur = s->log.back();
  return {key, cur.zone, cur.note, cur.sequence};
}

LabelAck AnnotationService::record_note(const std::string& session_id, const RecordKey& key,
                                        std::string note) {
  auto s = find(session_id);
  std::unique_lock lock(s->mutex);
  const auto it = s->current.find(key);
  if (it == s->current.end()) {
    throw Error(Errc::UnknownLabel, "no label yet for frame " + std::to_string(key.frame_index) +
                                        ", track '" + key.track_id + "'");
  }
  LabelEvent event = s->log[it->second];
  event.note = std::move(note);
  event.sequence = s->next_sequence++;
  s->log.push_back(std::move(event));
  it->second = s->log.size() - 1;
  const auto& cur = s->log.back();
  return {key, cur.zone, cur.note, cur.sequence};
}

NextUnit AnnotationService::next_unit(const std::string& session_id, const SliceKey& slice) const {
  auto s = find(session_id);
  std::shared_lock lock(s->mutex);
  for (const auto& frame : s->frames) {
    NextUnit unit;
    unit.frame_index = frame.frame_index;
    for (const auto& track : s->tracks) {
      if (!s->current.count({slice.coder_id, slice.pass_id, frame.frame_index, track})) {
        unit.unlabeled_tracks.push_back(track);
      }
    }
    if (!unit.unlabeled_tracks.empty()) return unit;
  }
  return NextUnit{true, 0, {}};
}

std::vector<TrackProgress> AnnotationService::progress(const std::string& session_id,
                                                       const std::optional<SliceKey>& slice) const {
  auto s = find(session_id);
  std::shared_lock lock(s->mutex);
  std::map<std::string, std::set<std::int64_t>> labeled;
  for (const auto& [key, idx] : s->current) {
    if (slice && (key.coder_id != slice->coder_id || key.pass_id != slice->pass_id)) continue;
    labeled[key.track_id].insert(key.frame_index);
  }
  std::vector<TrackProgress> out;
  for (const auto& track : s->tracks) {
    out.push_back({track, static_cast<std::int64_t>(labeled[track].size()),
                   static_cast<std::int64_t>(s->frames.size())});
  }
  return out;
}

SessionExport AnnotationService::export_session(const std::string& session_id,
                                                const SliceKey& slice) const {
  auto s = find(session_id);
  AnnotationSet set;
  set.meta = s->meta;
  {
    std::shared_lock lock(s->mutex);
    for (const auto& [key, idx] : s->current) {
      if (key.coder_id != slice.coder_id || key.pass_id != slice.pass_id) continue;
      const auto& e = s->log[idx];
      set.records.push_back({e.coder_id, e.pass_id, e.frame_index, e.track_id, e.zone, e.note});
    }
  }
  SessionExport out;
  out.partial = set.records.size() < s->frames.size() * s->tracks.size();
  out.csv = write_annotation_file(set);
  out.sidecar = write_session_meta(set.meta, out.partial);
  return out;
}

std::filesystem::path AnnotationService::frame_path(const std::string& session_id,
                                                    std::int64_t frame_index) const {
  auto s = find(session_id);
  const auto it = s->frame_lookup.find(frame_index);
  if (it == s->frame_lookup.end()) {
    throw Error(Errc::UnknownFrame, "frame " + std::to_string(frame_index) +
                                        " is not in the manifest of '" + session_id + "'");
  }
  return s->frames[it->second].path;
}

std::vector<LabelEvent> AnnotationService::event_log(const std::string& session_id) const {
  auto s = find(session_id);
  std::shared_lock lock(s->mutex);
  return s->log;
}

std::vector<std::string> AnnotationService::session_ids() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

}  // namespace proxkit
