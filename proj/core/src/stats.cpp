#include "proxkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "proxkit/error.hpp"

namespace proxkit::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(Errc::TooFewValues, "mean of an empty column");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw Error(Errc::TooFewValues, "standard deviation needs at least 2 values");
  }
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

bool is_constant(std::span<const double> xs) {
  return std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end();
}

std::vector<double> z_standardize(std::span<const double> xs) {
  const double s = sample_sd(xs);
  if (is_constant(xs) || s == 0) throw Error(Errc::ConstantColumn, "column has zero variance");
  const double m = mean(xs);
  std::vector<double> z(xs.size());
  std::transform(xs.begin(), xs.end(), z.begin(), [&](double x) { return (x - m) / s; });
  return z;
}

std::vector<double> mid_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, "columns differ in length (" + std::to_string(x.size()) +
                                          " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw Error(Errc::TooFewValues, "correlation needs at least 3 pairs");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (is_constant(x) || is_constant(y) || sxx == 0 || syy == 0) throw Error(Errc::ConstantInput, "correlation with a constant column");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

Correlation correlate(std::span<const double> x, std::span<const double> y) {
  return {pearson(x, y), spearman(x, y)};
}

}  // namespace proxkit::stats
