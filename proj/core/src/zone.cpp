#include "proxkit/zone.hpp"

#include "proxkit/error.hpp"

namespace proxkit {

Zone parse_zone(std::string_view field) {
  if (field.size() == 1) {
    if (auto z = zone_from_code(field.front())) {
      return *z;
    }
  }
  throw Error(Errc::UnknownZoneCode, "unknown zone code '" + std::string(field) + "'");
}

std::string_view zone_name(Zone z) noexcept {
  switch (z) {
    case Zone::Intimate: return "intimate";
    case Zone::Personal: return "personal";
    case Zone::Social: return "social";
    case Zone::OffScreen: return "offscreen";
  }
  return "?";
}

std::vector<Zone> zones_from_string(std::string_view codes) {
  std::vector<Zone> out;
  out.reserve(codes.size());
  for (char c : codes) {
    out.push_back(parse_zone(std::string_view(&c, 1)));
  }
  return out;
}

std::string zones_to_string(const std::vector<Zone>& zones) {
  std::string out;
  out.reserve(zones.size());
  for (Zone z : zones) {
    out.push_back(zone_code(z));
  }
  return out;
}

}  // namespace proxkit
