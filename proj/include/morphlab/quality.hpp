#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "morphlab/error.hpp"
#include "morphlab/image.hpp"

namespace morphlab {

/// PSNR in dB over all samples (channels pooled) with peak 255. Identical
/// images give +infinity.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw InputError("PSNR needs matching images, got " + a.describe() + " and " +
                     b.describe());
  }
  // Integer sum of squares is exact and order independent.
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const int d = static_cast<int>(a.samples[i]) - static_cast<int>(b.samples[i]);
    sse += static_cast<std::uint64_t>(d * d);
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  const double mse = static_cast<double>(sse) / static_cast<double>(a.samples.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

struct BoxPlotStats {
  double minimum = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double maximum = 0;
  double lower_whisker = 0;
  double upper_whisker = 0;
  std::vector<double> outliers;
  std::size_t n = 0;
};

/// Linear interpolation between order statistics at zero-based position
/// p * (n - 1) of an ascending range.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Tukey box plot with 1.5 IQR fences. Whiskers sit on the most extreme
/// values inside the fences, clamped to the quartiles.
inline BoxPlotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) throw InputError("box plot needs at least one value");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw InputError("box plot values must be finite");
  }
  std::sort(v.begin(), v.end());

  BoxPlotStats s;
  s.n = v.size();
  s.minimum = v.front();
  s.maximum = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;

  s.lower_whisker = s.q1;
  s.upper_whisker = s.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      s.outliers.push_back(x);
    } else {
      s.lower_whisker = std::min(s.lower_whisker, x);
      s.upper_whisker = std::max(s.upper_whisker, x);
    }
  }
  return s;
}

}  // namespace morphlab
