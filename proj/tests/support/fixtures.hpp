#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "proxkit/annotation.hpp"

namespace proxkit::testing {

/// Random valid annotation set: up to 3 coders x 2 passes x `tracks` tracks
/// over `frames` sampled frames, with a few notes needing CSV quoting.
inline AnnotationSet random_set(std::uint64_t seed, int tracks = 3, int frames = 40) {
  std::mt19937_64 rng(seed);
  AnnotationSet set;
  set.meta.session_id = "sess-" + std::to_string(seed);
  set.meta.group_size = tracks;
  set.meta.frame_stride = 1 + static_cast<int>(rng() % 6);
  set.meta.frames_per_second = 25;
  const char* notes[] = {"", "", "", "left early", "said \"hi\"", "stood, then sat",
                         "two\nlines"};
  const int coders = 1 + static_cast<int>(rng() % 3);
  for (int c = 0; c < coders; ++c) {
    const int passes = 1 + static_cast<int>(rng() % 2);
    for (int p = 1; p <= passes; ++p) {
      for (int t = 1; t <= tracks; ++t) {
        for (int f = 0; f < frames; ++f) {
          if (rng() % 10 == 0) continue;  // gaps are legal
          AnnotationRecord r;
          r.coder_id = "c" + std::to_string(c + 1);
          r.pass_id = p;
          r.frame_index = static_cast<std::int64_t>(f) * set.meta.frame_stride;
          r.track_id = "t" + std::to_string(t);
          r.zone = static_cast<Zone>(rng() % 4);
          r.note = notes[rng() % 7];
          set.records.push_back(r);
        }
      }
    }
  }
  std::shuffle(set.records.begin(), set.records.end(), rng);
  return set;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("proxkit-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace proxkit::testing
