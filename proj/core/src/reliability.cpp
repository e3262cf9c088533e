#include "proxkit/reliability.hpp"

#include <map>

#include "proxkit/csv.hpp"
#include "proxkit/error.hpp"

namespace proxkit {

namespace {

using UnitKey = std::pair<std::int64_t, std::string>;  // (frame, track)

std::map<UnitKey, Zone> slice_labels(const AnnotationSet& set, const SliceKey& slice) {
  std::map<UnitKey, Zone> out;
  for (const auto& r : set.records) {
    if (r.coder_id == slice.coder_id && r.pass_id == slice.pass_id) {
      out.emplace(UnitKey{r.frame_index, r.track_id}, r.zone);
    }
  }
  if (out.empty()) {
    throw Error(Errc::EmptySlice, "slice " + slice.str() + " has no records");
  }
  return out;
}

}  // namespace

PairedLabels pair_labels(const AnnotationSet& set, const SliceKey& a, const SliceKey& b) {
  if (a == b) {
    throw Error(Errc::InvalidArgument, "cannot compare slice " + a.str() + " with itself");
  }
  const auto la = slice_labels(set, a);
  const auto lb = slice_labels(set, b);

  PairedLabels out;
  auto ia = la.begin();
  auto ib = lb.begin();
  while (ia != la.end() && ib != lb.end()) {
    if (ia->first < ib->first) {
      ++out.n_unmatched_a;
      ++ia;
    } else if (ib->first < ia->first) {
      ++out.n_unmatched_b;
      ++ib;
    } else {
      out.pairs.emplace_back(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  out.n_unmatched_a += static_cast<std::size_t>(std::distance(ia, la.end()));
  out.n_unmatched_b += static_cast<std::size_t>(std::distance(ib, lb.end()));
  if (out.pairs.empty()) {
    throw Error(Errc::NoOverlap, "slices " + a.str() + " and " + b.str() + " share no units");
  }
  return out;
}

ReliabilityReport reliability_report(const PairedLabels& pairs) {
  if (pairs.pairs.empty()) throw Error(Errc::NoPairs, "no aligned label pairs");

  ReliabilityReport r;
  for (const auto& [za, zb] : pairs.pairs) ++r.confusion[zone_index(za)][zone_index(zb)];
  r.n_pairs = static_cast<std::int64_t>(pairs.pairs.size());

  // Integer arithmetic up to the final division keeps kappa exact for
  // rational inputs: kappa = (n*agree - sum r_k c_k) / (n^2 - sum r_k c_k).
  std::int64_t agree = 0;
  std::int64_t chance = 0;
  for (std::size_t k = 0; k < kZoneCount; ++k) {
    agree += r.confusion[k][k];
    std::int64_t row = 0;
    std::int64_t col = 0;
    for (std::size_t j = 0; j < kZoneCount; ++j) {
      row += r.confusion[k][j];
      col += r.confusion[j][k];
    }
    chance += row * col;
  }
  const auto n = r.n_pairs;
  const auto n2 = static_cast<long double>(n) * static_cast<long double>(n);
  r.percent_agreement = static_cast<double>(agree) / static_cast<double>(n);
  r.expected_agreement = static_cast<double>(static_cast<long double>(chance) / n2);
  const auto num = static_cast<long double>(n) * agree - static_cast<long double>(chance);
  const auto den = n2 - static_cast<long double>(chance);
  r.kappa = den == 0 ? 1.0 : static_cast<double>(num / den);
  return r;
}

std::string write_reliability_csv(const std::vector<ReliabilityRow>& rows) {
  std::string out{kReliabilityHeader};
  out.push_back('\n');
  for (const auto& row : rows) {
    out += csv::join_line({row.session_id, row.slice_a.str(), row.slice_b.str(),
                           std::to_string(row.report.n_pairs), std::to_string(row.n_unmatched_a),
                           std::to_string(row.n_unmatched_b),
                           csv::format_double(row.report.percent_agreement),
                           csv::format_double(row.report.kappa)});
  }
  return out;
}

}  // namespace proxkit
