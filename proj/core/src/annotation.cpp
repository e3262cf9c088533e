#include "proxkit/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "proxkit/csv.hpp"
#include "proxkit/keyvalue.hpp"

namespace proxkit {

std::string_view agent_type_name(AgentType t) noexcept {
  return t == AgentType::Robot ? "robot" : "virtual";
}

std::optional<AgentType> agent_type_from_name(std::string_view name) noexcept {
  if (name == "robot") return AgentType::Robot;
  if (name == "virtual") return AgentType::Virtual;
  return std::nullopt;
}

bool is_token(std::string_view s) noexcept {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

void canonicalize(AnnotationSet& set) {
  std::stable_sort(set.records.begin(), set.records.end(),
                   [](const AnnotationRecord& a, const AnnotationRecord& b) {
                     return a.key() < b.key();
                   });
}

namespace {

void check_meta(const SessionMeta& meta, std::vector<Issue>& errors) {
  auto add = [&](std::string msg) {
    errors.push_back({std::nullopt, Errc::InvalidMeta, std::move(msg)});
  };
  if (!is_token(meta.session_id)) add("session_id must be a non-empty token");
  if (meta.group_size < 1) add("group_size must be >= 1");
  if (meta.frame_stride < 1) add("frame_stride must be >= 1");
  if (!(meta.frames_per_second > 0) || !std::isfinite(meta.frames_per_second)) {
    add("fps must be positive");
  }
  if (meta.grid_cm.first < 1 || meta.grid_cm.second < 1) add("grid_cm must be positive");
}

std::string describe(const RecordKey& k) {
  return "(" + k.coder_id + ", " + std::to_string(k.pass_id) + ", " +
         std::to_string(k.frame_index) + ", " + k.track_id + ")";
}

}  // namespace

ValidationReport validate_annotation_set(const AnnotationSet& set) {
  ValidationReport report;
  check_meta(set.meta, report.errors);

  std::map<RecordKey, std::size_t> seen;
  std::set<std::string> tracks;
  const int stride = set.meta.frame_stride;
  bool sorted = true;

  for (std::size_t idx = 0; idx < set.records.size(); ++idx) {
    const auto& r = set.records[idx];
    auto add = [&](Errc code, std::string msg) {
      report.errors.push_back({idx, code, std::move(msg)});
    };
    if (!is_token(r.coder_id)) add(Errc::InvalidToken, "coder_id must be a non-empty token");
    if (!is_token(r.track_id)) add(Errc::InvalidToken, "track_id must be a non-empty token");
    if (r.pass_id < 1) add(Errc::MalformedRow, "pass_id must be >= 1");
    if (r.frame_index < 0) {
      add(Errc::MalformedRow, "frame_index must be >= 0");
    } else if (stride >= 1 && r.frame_index % stride != 0) {
      add(Errc::NonMonotoneStride, "frame_index " + std::to_string(r.frame_index) +
                                       " is not a multiple of stride " + std::to_string(stride));
    }
    const auto key = r.key();
    if (auto [it, inserted] = seen.emplace(key, idx); !inserted) {
      add(Errc::DuplicateKey, "duplicate key " + describe(key) + " (first at record " +
                                  std::to_string(it->second) + ")");
    }
    if (tracks.insert(r.track_id).second &&
        tracks.size() > static_cast<std::size_t>(std::max(set.meta.group_size, 0))) {
      add(Errc::TooManyTracks, "track '" + r.track_id + "' exceeds group_size " +
                                   std::to_string(set.meta.group_size));
    }
    if (idx > 0 && key < set.records[idx - 1].key()) sorted = false;
  }
  if (!sorted) {
    report.warnings.push_back(
        {std::nullopt, Errc::InvalidSet, "records are not in canonical order"});
  }
  return report;
}

AnnotationSet parse_annotation_file(std::string_view text, const SessionMeta& meta) {
  const auto rows = csv::read(text);
  if (rows.empty() || rows.front().line != 1 ||
      csv::join_line(rows.front().fields) != std::string(kAnnotationHeader) + "\n") {
    throw Error(Errc::MissingHeader,
                "first line must be '" + std::string(kAnnotationHeader) + "'", 1);
  }

  AnnotationSet set;
  set.meta = meta;
  std::vector<std::size_t> lines;
  set.records.reserve(rows.size() - 1);
  lines.reserve(rows.size() - 1);

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 6) {
      throw Error(Errc::MalformedRow,
                  "expected 6 fields, found " + std::to_string(row.fields.size()), row.line);
    }
    AnnotationRecord rec;
    rec.coder_id = row.fields[0];
    const auto pass = csv::parse_int(row.fields[1], "pass_id", row.line);
    if (pass < 1 || pass > 1'000'000) {
      throw Error(Errc::MalformedRow, "pass_id out of range", row.line);
    }
    rec.pass_id = static_cast<int>(pass);
    rec.frame_index = csv::parse_int(row.fields[2], "frame_index", row.line);
    rec.track_id = row.fields[3];
    try {
      rec.zone = parse_zone(row.fields[4]);
    } catch (const Error& e) {
      throw Error(e.code(), e.detail(), row.line);
    }
    rec.note = row.fields[5];
    set.records.push_back(std::move(rec));
    lines.push_back(row.line);
  }

  const auto report = validate_annotation_set(set);
  if (!report.ok()) {
    const auto& first = report.errors.front();
    std::optional<std::size_t> line;
    if (first.record) line = lines[*first.record];
    throw Error(first.code, first.message, line);
  }
  canonicalize(set);
  return set;
}

std::string write_annotation_file(const AnnotationSet& set) {
  const auto report = validate_annotation_set(set);
  if (!report.ok()) {
    throw Error(Errc::InvalidSet, "cannot write invalid set: " + report.errors.front().message);
  }
  std::vector<const AnnotationRecord*> order;
  order.reserve(set.records.size());
  for (const auto& r : set.records) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) { return a->key() < b->key(); });

  std::string out{kAnnotationHeader};
  out.push_back('\n');
  for (const auto* r : order) {
    out += r->coder_id;
    out.push_back(',');
    out += std::to_string(r->pass_id);
    out.push_back(',');
    out += std::to_string(r->frame_index);
    out.push_back(',');
    out += r->track_id;
    out.push_back(',');
    out.push_back(zone_code(r->zone));
    out.push_back(',');
    out += csv::escape(r->note, /*always_quote=*/true);
    out.push_back('\n');
  }
  return out;
}

SidecarFile parse_session_meta(std::string_view text) {
  KeyValueFile kv;
  try {
    kv = KeyValueFile::parse(text);
  } catch (const Error& e) {
    throw Error(Errc::InvalidMeta, e.detail(), e.line());
  }
  static const std::set<std::string> known{"session_id", "agent_type", "group_size",
                                           "frame_stride", "fps", "grid_cm", "partial"};
  for (const auto& [key, entry] : kv.entries()) {
    if (!known.count(key)) {
      throw Error(Errc::InvalidMeta, "unknown key '" + key + "'", entry.line);
    }
  }
  auto require = [&](const std::string& key) {
    auto v = kv.get(key);
    if (!v) throw Error(Errc::InvalidMeta, "missing required key '" + key + "'");
    return *v;
  };
  auto line_of = [&](const std::string& key) { return kv.entries().at(key).line; };
  auto as_int = [&](const std::string& key) {
    try {
      return csv::parse_int(*kv.get(key), key, line_of(key));
    } catch (const Error& e) {
      throw Error(Errc::InvalidMeta, e.detail(), e.line());
    }
  };

  SidecarFile out;
  out.meta.session_id = require("session_id");
  const auto agent = agent_type_from_name(require("agent_type"));
  if (!agent) {
    throw Error(Errc::InvalidMeta, "agent_type must be 'robot' or 'virtual'",
                line_of("agent_type"));
  }
  out.meta.agent_type = *agent;
  require("group_size");
  out.meta.group_size = static_cast<int>(as_int("group_size"));
  if (kv.contains("frame_stride")) {
    out.meta.frame_stride = static_cast<int>(as_int("frame_stride"));
  }
  if (kv.contains("fps")) {
    try {
      out.meta.frames_per_second = csv::parse_double(*kv.get("fps"), "fps", line_of("fps"));
    } catch (const Error& e) {
      throw Error(Errc::InvalidMeta, e.detail(), e.line());
    }
  } else {
    out.warnings.emplace_back("fps missing; defaulting to 25");
  }
  if (auto grid = kv.get("grid_cm")) {
    const auto parts = csv::split(*grid, 'x');
    if (parts.size() != 2) {
      throw Error(Errc::InvalidMeta, "grid_cm must look like 150x150", line_of("grid_cm"));
    }
    try {
      out.meta.grid_cm = {static_cast<int>(csv::parse_int(parts[0], "grid_cm", line_of("grid_cm"))),
                          static_cast<int>(csv::parse_int(parts[1], "grid_cm", line_of("grid_cm")))};
    } catch (const Error& e) {
      throw Error(Errc::InvalidMeta, e.detail(), e.line());
    }
  }
  if (auto partial = kv.get("partial")) {
    if (*partial != "true" && *partial != "false") {
      throw Error(Errc::InvalidMeta, "partial must be true or false", line_of("partial"));
    }
    out.partial = *partial == "true";
  }

  std::vector<Issue> issues;
  check_meta(out.meta, issues);
  if (!issues.empty()) throw Error(Errc::InvalidMeta, issues.front().message);
  return out;
}

std::string write_session_meta(const SessionMeta& meta, std::optional<bool> partial) {
  std::ostringstream os;
  os << "session_id=" << meta.session_id << '\n'
     << "agent_type=" << agent_type_name(meta.agent_type) << '\n'
     << "group_size=" << meta.group_size << '\n'
     << "frame_stride=" << meta.frame_stride << '\n'
     << "fps=" << csv::format_double(meta.frames_per_second) << '\n'
     << "grid_cm=" << meta.grid_cm.first << 'x' << meta.grid_cm.second << '\n';
  if (partial) os << "partial=" << (*partial ? "true" : "false") << '\n';
  return os.str();
}

std::filesystem::path sidecar_path(const std::filesystem::path& annotation_path) {
  auto p = annotation_path;
  p += ".meta";
  return p;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::Io, "write failed for '" + path.string() + "'");
}

LoadedAnnotation load_annotation(const std::filesystem::path& annotation_path) {
  const auto meta_path = sidecar_path(annotation_path);
  if (!std::filesystem::exists(meta_path)) {
    throw Error(Errc::InvalidMeta, "missing metadata sidecar '" + meta_path.string() + "'");
  }
  auto sidecar = parse_session_meta(read_text_file(meta_path));
  LoadedAnnotation out;
  out.set = parse_annotation_file(read_text_file(annotation_path), sidecar.meta);
  out.warnings = std::move(sidecar.warnings);
  return out;
}

void save_annotation(const std::filesystem::path& annotation_path, const AnnotationSet& set,
                     std::optional<bool> partial) {
  write_text_file(annotation_path, write_annotation_file(set));
  write_text_file(sidecar_path(annotation_path), write_session_meta(set.meta, partial));
}

SliceKey SliceKey::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::InvalidArgument, "expected coder:pass, got '" + std::string(text) + "'");
  }
  SliceKey key;
  key.coder_id = std::string(text.substr(0, colon));
  if (!is_token(key.coder_id)) {
    throw Error(Errc::InvalidArgument, "bad coder id in '" + std::string(text) + "'");
  }
  std::int64_t pass = 0;
  try {
    pass = csv::parse_int(text.substr(colon + 1), "pass", 0);
  } catch (const Error& e) {
    throw Error(Errc::InvalidArgument, e.detail());
  }
  if (pass < 1) throw Error(Errc::InvalidArgument, "pass must be >= 1");
  key.pass_id = static_cast<int>(pass);
  return key;
}

std::string SliceKey::str() const { return coder_id + ":" + std::to_string(pass_id); }

std::vector<SliceKey> slices_of(const AnnotationSet& set) {
  std::set<SliceKey> keys;
  for (const auto& r : set.records) keys.insert({r.coder_id, r.pass_id});
  return {keys.begin(), keys.end()};
}

}  // namespace proxkit
