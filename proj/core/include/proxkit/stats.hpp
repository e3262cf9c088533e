#pragma once

#include <span>
#include <vector>

namespace proxkit::stats {

double mean(std::span<const double> xs);

/// Sample (n-1) standard deviation, two-pass. Throws Error(TooFewValues) for n < 2.
double sample_sd(std::span<const double> xs);

/// True when every element equals the first (or the span is empty).
bool is_constant(std::span<const double> xs);

/// z_i = (x_i - mean) / s with s the sample standard deviation.
/// Throws Error(TooFewValues) for n < 2 and Error(ConstantColumn) when all
/// values are equal.
std::vector<double> z_standardize(std::span<const double> xs);

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> mid_ranks(std::span<const double> xs);

/// Pearson r from centred sums (two passes), clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson r on mid-ranks.
double spearman(std::span<const double> x, std::span<const double> y);

struct Correlation {
  double pearson_r = 0;
  double spearman_rho = 0;
};

/// Throws Error(LengthMismatch), Error(TooFewValues) for n < 3 and
/// Error(ConstantInput) when either side has zero variance.
Correlation correlate(std::span<const double> x, std::span<const double> y);

}  // namespace proxkit::stats
