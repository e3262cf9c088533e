#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "proxkit/annotation.hpp"
#include "proxkit/survey.hpp"
#include "proxkit/triangulation.hpp"

namespace proxkit {

/// Row-stochastic 4x4 matrix over (i, p, s, x).
using StochasticMatrix = std::array<std::array<double, kZoneCount>, kZoneCount>;

/// Diagonal `self_prob`, remaining mass spread evenly.
StochasticMatrix dwell_matrix(double self_prob);

/// (1 - w) * base + w * A, where every row of A jumps to Intimate.
StochasticMatrix blend_toward_intimate(const StochasticMatrix& base, double w);

struct GeneratorConfig {
  /// weight of group size k at index k-1
  std::vector<double> group_size_weights{0.45, 0.30, 0.15, 0.10};
  int session_frames = 160;
  int frame_stride = 4;
  double frames_per_second = 25.0;
  double coupling = 1.0;
  StochasticMatrix base_transition = dwell_matrix(0.85);
  std::uint64_t seed = 187;
  int n_sessions = 187;
  double canvas_mm = 300.0;
  ScaleDefinition scale{10, 1, 9, {3, 7}};
  std::string coder_id = "c1";
  /// Probability that a second coding pass relabels a unit; 0 emits one pass.
  double recode_rate = 0.0;

  /// Throws Error(InvalidConfig).
  void validate() const;
  /// Applies one `key = value` setting. Returns false for keys it does not own.
  bool apply(const std::string& key, const std::string& value);
  /// Flat text form accepted by `apply`.
  std::string write() const;
};

struct SyntheticSession {
  AnnotationSet annotation;
  std::map<std::string, double> ground_truth_bonding;  // track -> b in [0, 1]
  std::vector<SurveyRecord> survey;
  std::vector<LinkRow> link;
};

/// Deterministic in (config.seed, session_id); each session draws from its
/// own substream so generation order never matters.
SyntheticSession generate_session(const GeneratorConfig& config, const std::string& session_id);

/// `s0001`, `s0002`, ...
std::string corpus_session_id(int index);

std::vector<SyntheticSession> generate_corpus(const GeneratorConfig& config, int n_sessions);

/// Writes a study directory:
///   sessions/<id>.csv + .csv.meta, survey.csv, scale.txt, link.csv,
///   ground_truth.csv, generator.conf
void write_study(const std::filesystem::path& dir, const GeneratorConfig& config,
                 const std::vector<SyntheticSession>& corpus);

}  // namespace proxkit
