#include "proxkit/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"

namespace proxkit {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

using Key = std::pair<std::string, std::string>;

std::string describe(const Key& k) { return "(" + k.first + ", " + k.second + ")"; }

}  // namespace

void LinkTable::validate() const {
  std::set<Key> participants;
  std::set<Key> tracks;
  for (const auto& r : rows) {
    if (!participants.insert({r.session_id, r.participant_id}).second) {
      throw Error(Errc::DuplicateLinkKey,
                  "participant " + describe({r.session_id, r.participant_id}) + " linked twice");
    }
    if (!tracks.insert({r.session_id, r.track_id}).second) {
      throw Error(Errc::DuplicateLinkKey,
                  "track " + describe({r.session_id, r.track_id}) + " linked twice");
    }
  }
}

LinkTable LinkTable::parse(std::string_view text) {
  const auto rows = csv::read(text);
  if (rows.empty() || csv::join_line(rows.front().fields) != std::string(kLinkHeader) + "\n") {
    throw Error(Errc::MissingHeader, "expected header '" + std::string(kLinkHeader) + "'", 1);
  }
  LinkTable t;
  std::set<Key> participants;
  std::set<Key> tracks;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto line = rows[i].line;
    if (f.size() != 3) {
      throw Error(Errc::MalformedRow, "expected 3 fields, found " + std::to_string(f.size()), line);
    }
    if (!is_token(f[0]) || !is_token(f[1]) || !is_token(f[2])) {
      throw Error(Errc::InvalidToken, "link identifiers must be tokens", line);
    }
    if (!participants.insert({f[0], f[1]}).second || !tracks.insert({f[0], f[2]}).second) {
      throw Error(Errc::DuplicateLinkKey, "duplicate link key", line);
    }
    t.rows.push_back({f[0], f[1], f[2]});
  }
  return t;
}

std::string LinkTable::write() const {
  std::string out{kLinkHeader};
  out.push_back('\n');
  for (const auto& r : rows) out += csv::join_line({r.session_id, r.participant_id, r.track_id});
  return out;
}

std::optional<std::size_t> TriangulatedTable::index_of(std::string_view variable) const {
  const auto it = std::find(variables.begin(), variables.end(), variable);
  if (it == variables.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

std::vector<double> TriangulatedTable::column(std::string_view name) const {
  const bool want_z = name.substr(0, 2) == "z_";
  auto idx = index_of(name);
  if (!idx && want_z) idx = index_of(name.substr(2));
  if (!idx) throw Error(Errc::UnknownVariable, "no column '" + std::string(name) + "'");
  const bool use_z = want_z && !index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(use_z ? r.z[*idx] : r.values[*idx]);
  return out;
}

JoinResult join_triangulated(const std::vector<MetricsRow>& metrics,
                             const std::vector<BondingMeasure>& bonding, const LinkTable& link) {
  link.validate();

  std::map<Key, const MetricsRow*> by_track;
  for (const auto& m : metrics) {
    if (!by_track.emplace(Key{m.session_id, m.track_id}, &m).second) {
      throw Error(Errc::DuplicateKey, "metrics hold track " + describe({m.session_id, m.track_id}) +
                                          " more than once; select a single coder:pass slice");
    }
  }
  std::map<Key, const BondingMeasure*> by_participant;
  for (const auto& b : bonding) {
    if (!by_participant.emplace(Key{b.session_id, b.participant_id}, &b).second) {
      throw Error(Errc::DuplicateKey,
                  "bonding holds participant " + describe({b.session_id, b.participant_id}) +
                      " more than once");
    }
  }

  JoinResult out;
  auto& table = out.table;
  for (auto v : kProximityVariables) table.variables.emplace_back(v);
  for (auto v : kBondingVariables) table.variables.emplace_back(v);

  std::set<Key> used_tracks;
  std::set<Key> used_participants;
  auto links = link.rows;
  std::sort(links.begin(), links.end(), [](const LinkRow& a, const LinkRow& b) {
    return std::tie(a.session_id, a.participant_id) < std::tie(b.session_id, b.participant_id);
  });
  for (const auto& l : links) {
    const Key tk{l.session_id, l.track_id};
    const Key pk{l.session_id, l.participant_id};
    const auto mt = by_track.find(tk);
    if (mt == by_track.end()) {
      throw Error(Errc::DanglingReference, "link names unknown track " + describe(tk));
    }
    const auto bp = by_participant.find(pk);
    if (bp == by_participant.end()) {
      throw Error(Errc::DanglingReference, "link names unknown participant " + describe(pk));
    }
    used_tracks.insert(tk);
    used_participants.insert(pk);
    const auto& m = *mt->second;
    const auto& b = *bp->second;
    TriangulatedRow row;
    row.session_id = l.session_id;
    row.participant_id = l.participant_id;
    row.track_id = l.track_id;
    row.values = {m.intimate,
                  m.personal,
                  m.social,
                  m.offscreen_fraction,
                  static_cast<double>(m.zone_transitions),
                  static_cast<double>(m.raw_changes),
                  m.observed_seconds,
                  b.gas_score.value_or(kMissing),
                  b.distance_to_agent_mm};
    table.rows.push_back(std::move(row));
  }
  for (const auto& [k, m] : by_track) {
    if (!used_tracks.count(k)) out.report.unmatched_metrics.push_back(k);
  }
  for (const auto& [k, b] : by_participant) {
    if (!used_participants.count(k)) out.report.unmatched_bonding.push_back(k);
  }
  standardize(table);
  return out;
}

void standardize(TriangulatedTable& table) {
  table.unstandardized.clear();
  for (auto& r : table.rows) r.z.assign(table.variables.size(), kMissing);
  for (std::size_t v = 0; v < table.variables.size(); ++v) {
    std::vector<double> present;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const double x = table.rows[i].values[v];
      if (!std::isnan(x)) {
        present.push_back(x);
        where.push_back(i);
      }
    }
    try {
      const auto z = stats::z_standardize(present);
      for (std::size_t k = 0; k < z.size(); ++k) table.rows[where[k]].z[v] = z[k];
    } catch (const Error& e) {
      if (e.code() != Errc::ConstantColumn && e.code() != Errc::TooFewValues) throw;
      table.unstandardized.push_back(table.variables[v]);
    }
  }
}

TriangulatedTable aggregate_by_session(const TriangulatedTable& table) {
  TriangulatedTable out;
  out.variables = table.variables;
  std::map<std::string, std::vector<const TriangulatedRow*>> groups;
  for (const auto& r : table.rows) groups[r.session_id].push_back(&r);
  for (const auto& [session, rows] : groups) {
    TriangulatedRow agg;
    agg.session_id = session;
    agg.participant_id = "*";
    agg.track_id = "*";
    agg.values.assign(table.variables.size(), kMissing);
    for (std::size_t v = 0; v < table.variables.size(); ++v) {
      double sum = 0;
      std::size_t n = 0;
      for (const auto* r : rows) {
        if (!std::isnan(r->values[v])) {
          sum += r->values[v];
          ++n;
        }
      }
      if (n) agg.values[v] = sum / static_cast<double>(n);
    }
    out.rows.push_back(std::move(agg));
  }
  standardize(out);
  return out;
}

std::string write_triangulated_csv(const TriangulatedTable& table) {
  std::vector<std::string> header{"session_id", "participant_id", "track_id"};
  for (const auto& v : table.variables) header.push_back(v);
  for (const auto& v : table.variables) header.push_back("z_" + v);
  std::string out = csv::join_line(header);
  for (const auto& r : table.rows) {
    std::vector<std::string> fields{r.session_id, r.participant_id, r.track_id};
    for (double x : r.values) fields.push_back(csv::format_double(x));
    for (double z : r.z) fields.push_back(csv::format_double(z));
    out += csv::join_line(fields);
  }
  return out;
}

TriangulatedTable parse_triangulated_csv(std::string_view text) {
  const auto rows = csv::read(text);
  if (rows.empty() || rows.front().fields.size() < 3 || rows.front().fields[0] != "session_id" ||
      rows.front().fields[1] != "participant_id" || rows.front().fields[2] != "track_id") {
    throw Error(Errc::MissingHeader, "table must start with session_id,participant_id,track_id", 1);
  }
  const auto& header = rows.front().fields;
  TriangulatedTable t;
  std::vector<std::size_t> value_cols;
  std::map<std::string, std::size_t> z_cols;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c].rfind("z_", 0) == 0) {
      z_cols[header[c].substr(2)] = c;
    } else {
      t.variables.push_back(header[c]);
      value_cols.push_back(c);
    }
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto line = rows[i].line;
    if (f.size() != header.size()) {
      throw Error(Errc::MalformedRow, "row width differs from header", line);
    }
    TriangulatedRow r;
    r.session_id = f[0];
    r.participant_id = f[1];
    r.track_id = f[2];
    auto cell = [&](std::size_t c) {
      return f[c].empty() ? kMissing : csv::parse_double(f[c], header[c], line);
    };
    for (std::size_t k = 0; k < t.variables.size(); ++k) {
      r.values.push_back(cell(value_cols[k]));
      const auto z = z_cols.find(t.variables[k]);
      r.z.push_back(z == z_cols.end() ? kMissing : cell(z->second));
    }
    t.rows.push_back(std::move(r));
  }
  for (const auto& v : t.variables) {
    if (!z_cols.count(v)) t.unstandardized.push_back(v);
  }
  return t;
}

std::vector<std::pair<std::string, std::string>> parse_pair_spec(std::string_view spec) {
  std::vector<std::pair<std::string, std::string>> out;
  if (csv::trim(spec) == "all") {
    for (auto x : kProximityVariables) {
      for (auto y : kBondingVariables) out.emplace_back(x, y);
    }
    return out;
  }
  for (const auto& item : csv::split(spec, ',')) {
    const auto parts = csv::split(csv::trim(item), ':');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
      throw Error(Errc::InvalidArgument, "pair '" + item + "' is not x:y");
    }
    out.emplace_back(parts[0], parts[1]);
  }
  return out;
}

CorrelationReport correlation_report(
    const TriangulatedTable& table, const std::vector<std::pair<std::string, std::string>>& pairs) {
  CorrelationReport report;
  for (const auto& [xn, yn] : pairs) {
    const auto xs = table.column(xn);
    const auto ys = table.column(yn);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isnan(xs[i]) && !std::isnan(ys[i])) {
        x.push_back(xs[i]);
        y.push_back(ys[i]);
      }
    }
    try {
      const auto c = stats::correlate(x, y);
      report.entries.push_back({xn, yn, x.size(), c.pearson_r, c.spearman_rho});
    } catch (const Error& e) {
      if (e.code() != Errc::TooFewValues && e.code() != Errc::ConstantInput) throw;
      report.skipped.emplace_back(xn + ":" + yn, e.what());
    }
  }
  return report;
}

std::string write_correlation_csv(const CorrelationReport& report) {
  std::string out{kCorrelationHeader};
  out.push_back('\n');
  for (const auto& e : report.entries) {
    out += csv::join_line({e.variable_x, e.variable_y, std::to_string(e.n),
                           csv::format_double(e.pearson_r), csv::format_double(e.spearman_rho)});
  }
  return out;
}

}  // namespace proxkit
