#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proxkit {

/// Proximity zone a coder assigns to one person in one sampled frame.
/// Declaration order is proximity order; the three grid zones come first.
enum class Zone : std::uint8_t { Intimate = 0, Personal = 1, Social = 2, OffScreen = 3 };

inline constexpr std::size_t kZoneCount = 4;
inline constexpr std::array<Zone, kZoneCount> kAllZones{Zone::Intimate, Zone::Personal,
                                                        Zone::Social, Zone::OffScreen};
inline constexpr std::array<Zone, 3> kGridZones{Zone::Intimate, Zone::Personal, Zone::Social};

constexpr std::size_t zone_index(Zone z) noexcept { return static_cast<std::size_t>(z); }
constexpr bool on_grid(Zone z) noexcept { return z != Zone::OffScreen; }

constexpr char zone_code(Zone z) noexcept {
  switch (z) {
    case Zone::Intimate: return 'i';
    case Zone::Personal: return 'p';
    case Zone::Social: return 's';
    case Zone::OffScreen: return 'x';
  }
  return '?';
}

constexpr std::optional<Zone> zone_from_code(char c) noexcept {
  switch (c) {
    case 'i': return Zone::Intimate;
    case 'p': return Zone::Personal;
    case 's': return Zone::Social;
    case 'x': return Zone::OffScreen;
    default: return std::nullopt;
  }
}

/// Parses a one-letter zone field. Throws Error(UnknownZoneCode).
Zone parse_zone(std::string_view field);

std::string_view zone_name(Zone z) noexcept;

/// "iipx" <-> {Intimate, Intimate, Personal, OffScreen}. Throws on unknown letters.
std::vector<Zone> zones_from_string(std::string_view codes);
std::string zones_to_string(const std::vector<Zone>& zones);

}  // namespace proxkit
