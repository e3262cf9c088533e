#include "proxkit/survey.hpp"

#include <cmath>
#include <numeric>

#include "proxkit/annotation.hpp"
#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"
#include "proxkit/keyvalue.hpp"

namespace proxkit {

void ScaleDefinition::validate() const {
  if (item_count < 1) throw Error(Errc::InvalidScale, "items must be >= 1");
  if (likert_min >= likert_max) throw Error(Errc::InvalidScale, "likert_min must be < likert_max");
  for (int item : reversed_items) {
    if (item < 1 || item > item_count) {
      throw Error(Errc::InvalidScale, "reversed item " + std::to_string(item) + " out of range");
    }
  }
}

ScaleDefinition ScaleDefinition::parse(std::string_view text) {
  KeyValueFile kv;
  try {
    kv = KeyValueFile::parse(text);
  } catch (const Error& e) {
    throw Error(Errc::InvalidScale, e.detail(), e.line());
  }
  ScaleDefinition def;
  auto as_int = [&](const std::string& key) {
    const auto& entry = kv.entries().at(key);
    try {
      return static_cast<int>(csv::parse_int(entry.value, key, entry.line));
    } catch (const Error& e) {
      throw Error(Errc::InvalidScale, e.detail(), e.line());
    }
  };
  for (const auto& [key, entry] : kv.entries()) {
    if (key == "items") {
      def.item_count = as_int(key);
    } else if (key == "likert_min") {
      def.likert_min = as_int(key);
    } else if (key == "likert_max") {
      def.likert_max = as_int(key);
    } else if (key == "reversed") {
      if (entry.value.empty()) continue;
      for (const auto& part : csv::split(entry.value, ',')) {
        try {
          def.reversed_items.insert(
              static_cast<int>(csv::parse_int(csv::trim(part), "reversed item", entry.line)));
        } catch (const Error& e) {
          throw Error(Errc::InvalidScale, e.detail(), e.line());
        }
      }
    } else {
      throw Error(Errc::InvalidScale, "unknown key '" + key + "'", entry.line);
    }
  }
  if (!kv.contains("items")) throw Error(Errc::InvalidScale, "missing key 'items'");
  def.validate();
  return def;
}

std::string ScaleDefinition::write() const {
  std::string out = "items = " + std::to_string(item_count) + "\n" +
                    "likert_min = " + std::to_string(likert_min) + "\n" +
                    "likert_max = " + std::to_string(likert_max) + "\n" + "reversed = ";
  bool first = true;
  for (int item : reversed_items) {
    if (!first) out += ",";
    out += std::to_string(item);
    first = false;
  }
  out += "\n";
  return out;
}

bool is_canvas_entity(std::string_view id) noexcept {
  if (id == "self" || id == "agent") return true;
  constexpr std::string_view prefix = "member-";
  if (id.substr(0, prefix.size()) != prefix || id.size() == prefix.size()) return false;
  const auto digits = id.substr(prefix.size());
  if (digits.front() == '0') return false;
  for (char c : digits) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

const CanvasPlacement* SurveyRecord::find(std::string_view entity) const noexcept {
  for (const auto& p : placements) {
    if (p.entity_id == entity) return &p;
  }
  return nullptr;
}

namespace {

std::vector<CanvasPlacement> parse_placements(std::string_view field, double width,
                                              double height, std::size_t line) {
  std::vector<CanvasPlacement> out;
  if (csv::trim(field).empty()) return out;
  for (const auto& item : csv::split(field, ';')) {
    const auto parts = csv::split(csv::trim(item), ':');
    if (parts.size() != 3) {
      throw Error(Errc::BadPlacementCoordinate, "placement '" + item + "' is not entity:x:y",
                  line);
    }
    if (!is_canvas_entity(parts[0])) {
      throw Error(Errc::BadPlacementCoordinate, "unknown canvas entity '" + parts[0] + "'", line);
    }
    CanvasPlacement p;
    p.entity_id = parts[0];
    try {
      p.x_mm = csv::parse_double(parts[1], "x_mm", line);
      p.y_mm = csv::parse_double(parts[2], "y_mm", line);
    } catch (const Error& e) {
      throw Error(Errc::BadPlacementCoordinate, e.detail(), line);
    }
    if (p.x_mm < 0 || p.x_mm > width || p.y_mm < 0 || p.y_mm > height) {
      throw Error(Errc::BadPlacementCoordinate,
                  "placement '" + item + "' lies outside the canvas", line);
    }
    for (const auto& q : out) {
      if (q.entity_id == p.entity_id) {
        throw Error(Errc::DuplicatePlacement, "entity '" + p.entity_id + "' placed twice", line);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

void check_responses(const SurveyRecord& record, const ScaleDefinition& scale,
                     std::optional<std::size_t> line) {
  if (record.gas_responses.size() != static_cast<std::size_t>(scale.item_count)) {
    throw Error(Errc::ResponseOutOfRange,
                "expected " + std::to_string(scale.item_count) + " responses", line);
  }
  for (std::size_t i = 0; i < record.gas_responses.size(); ++i) {
    const int r = record.gas_responses[i];
    if (r < scale.likert_min || r > scale.likert_max) {
      throw Error(Errc::ResponseOutOfRange,
                  "gas_" + std::to_string(i + 1) + " = " + std::to_string(r) + " outside " +
                      std::to_string(scale.likert_min) + ".." + std::to_string(scale.likert_max),
                  line);
    }
  }
}

std::string survey_header(int items) {
  std::string h = "participant_id,session_id";
  for (int i = 1; i <= items; ++i) h += ",gas_" + std::to_string(i);
  h += ",placements,demographics";
  return h;
}

}  // namespace

SurveyFile parse_survey_file(std::string_view text, const ScaleDefinition& scale) {
  scale.validate();
  SurveyFile file;

  // Leading comment lines carry the canvas size.
  std::size_t pos = 0;
  std::size_t line = 1;
  bool have_canvas = false;
  while (pos < text.size() && text[pos] == '#') {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto comment = csv::trim(text.substr(pos + 1, end - pos - 1));
    constexpr std::string_view key = "canvas_mm=";
    if (comment.substr(0, key.size()) == key) {
      const auto dims = csv::split(comment.substr(key.size()), ',');
      if (dims.size() != 2) throw Error(Errc::MissingHeader, "canvas_mm must be W,H", line);
      file.canvas_width_mm = csv::parse_double(csv::trim(dims[0]), "canvas width", line);
      file.canvas_height_mm = csv::parse_double(csv::trim(dims[1]), "canvas height", line);
      if (file.canvas_width_mm <= 0 || file.canvas_height_mm <= 0) {
        throw Error(Errc::MissingHeader, "canvas dimensions must be positive", line);
      }
      have_canvas = true;
    }
    pos = end + 1;
    ++line;
  }
  if (!have_canvas) throw Error(Errc::MissingHeader, "missing '# canvas_mm=W,H' comment", 1);

  const auto rows = csv::read(text.substr(std::min(pos, text.size())), line);
  const auto header = survey_header(scale.item_count);
  if (rows.empty() || csv::join_line(rows.front().fields) != header + "\n") {
    throw Error(Errc::MissingHeader, "expected header '" + header + "'", line);
  }
  const std::size_t n_fields = static_cast<std::size_t>(scale.item_count) + 4;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != n_fields) {
      throw Error(Errc::MalformedRow,
                  "expected " + std::to_string(n_fields) + " fields, found " +
                      std::to_string(row.fields.size()),
                  row.line);
    }
    SurveyRecord rec;
    rec.participant_id = row.fields[0];
    rec.session_id = row.fields[1];
    if (!is_token(rec.participant_id) || !is_token(rec.session_id)) {
      throw Error(Errc::InvalidToken, "participant_id and session_id must be tokens", row.line);
    }
    for (int k = 0; k < scale.item_count; ++k) {
      rec.gas_responses.push_back(static_cast<int>(csv::parse_int(
          row.fields[2 + k], "gas_" + std::to_string(k + 1), row.line)));
    }
    check_responses(rec, scale, row.line);
    rec.canvas_width_mm = file.canvas_width_mm;
    rec.canvas_height_mm = file.canvas_height_mm;
    rec.placements = parse_placements(row.fields[n_fields - 2], file.canvas_width_mm,
                                      file.canvas_height_mm, row.line);
    if (!rec.find("self")) {
      throw Error(Errc::MissingSelfPlacement,
                  "participant '" + rec.participant_id + "' has no self placement", row.line);
    }
    rec.demographics = row.fields[n_fields - 1];
    file.records.push_back(std::move(rec));
  }
  return file;
}

std::string write_survey_file(const SurveyFile& file, const ScaleDefinition& scale) {
  std::string out = "# canvas_mm=" + csv::format_double(file.canvas_width_mm) + "," +
                    csv::format_double(file.canvas_height_mm) + "\n";
  out += survey_header(scale.item_count) + "\n";
  for (const auto& r : file.records) {
    std::vector<std::string> fields{r.participant_id, r.session_id};
    for (int v : r.gas_responses) fields.push_back(std::to_string(v));
    std::string placements;
    for (const auto& p : r.placements) {
      if (!placements.empty()) placements += ';';
      placements += p.entity_id + ":" + csv::format_double(p.x_mm) + ":" +
                    csv::format_double(p.y_mm);
    }
    fields.push_back(placements);
    fields.push_back(csv::escape(r.demographics));
    out += csv::join_line(fields);
  }
  return out;
}

int reverse_response(int response, const ScaleDefinition& scale) noexcept {
  return scale.likert_min + scale.likert_max - response;
}

double score_gas(const SurveyRecord& record, const ScaleDefinition& scale) {
  scale.validate();
  check_responses(record, scale, std::nullopt);
  double sum = 0;
  for (std::size_t i = 0; i < record.gas_responses.size(); ++i) {
    const int item = static_cast<int>(i) + 1;
    const int r = record.gas_responses[i];
    sum += scale.reversed_items.count(item) ? reverse_response(r, scale) : r;
  }
  return sum / static_cast<double>(record.gas_responses.size());
}

BondingMeasure canvas_bonding(const SurveyRecord& record) {
  const auto* self = record.find("self");
  if (!self) {
    throw Error(Errc::MissingSelfPlacement,
                "participant '" + record.participant_id + "' has no self placement");
  }
  const auto* agent = record.find("agent");
  if (!agent) {
    throw Error(Errc::MissingAgentPlacement,
                "participant '" + record.participant_id + "' has no agent placement");
  }
  BondingMeasure m;
  m.participant_id = record.participant_id;
  m.session_id = record.session_id;
  m.distance_to_agent_mm = std::hypot(agent->x_mm - self->x_mm, agent->y_mm - self->y_mm);
  for (const auto& p : record.placements) {
    if (p.entity_id.rfind("member-", 0) == 0) {
      m.distances_to_members_mm[p.entity_id] = std::hypot(p.x_mm - self->x_mm, p.y_mm - self->y_mm);
    }
  }
  return m;
}

BondingMeasure bonding_measure(const SurveyRecord& record, const ScaleDefinition& scale) {
  auto m = canvas_bonding(record);
  m.gas_score = score_gas(record, scale);
  return m;
}

std::string write_bonding_csv(const std::vector<BondingMeasure>& measures) {
  std::string out{kBondingHeader};
  out.push_back('\n');
  for (const auto& m : measures) {
    std::string members;
    if (!m.distances_to_members_mm.empty()) {
      double sum = 0;
      for (const auto& [id, d] : m.distances_to_members_mm) sum += d;
      members = csv::format_double(sum / static_cast<double>(m.distances_to_members_mm.size()));
    }
    out += csv::join_line({m.participant_id, m.session_id,
                           m.gas_score ? csv::format_double(*m.gas_score) : std::string{},
                           csv::format_double(m.distance_to_agent_mm), members});
  }
  return out;
}

std::vector<BondingMeasure> parse_bonding_csv(std::string_view text) {
  const auto rows = csv::read(text);
  if (rows.empty() || csv::join_line(rows.front().fields) != std::string(kBondingHeader) + "\n") {
    throw Error(Errc::MissingHeader, "bonding file must start with the bonding header", 1);
  }
  std::vector<BondingMeasure> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto line = rows[i].line;
    if (f.size() != 5) {
      throw Error(Errc::MalformedRow, "expected 5 fields, found " + std::to_string(f.size()), line);
    }
    BondingMeasure m;
    m.participant_id = f[0];
    m.session_id = f[1];
    if (!is_token(m.participant_id) || !is_token(m.session_id)) {
      throw Error(Errc::InvalidToken, "participant_id and session_id must be tokens", line);
    }
    if (!f[2].empty()) m.gas_score = csv::parse_double(f[2], "gas_score", line);
    m.distance_to_agent_mm = csv::parse_double(f[3], "distance_to_agent_mm", line);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace proxkit
