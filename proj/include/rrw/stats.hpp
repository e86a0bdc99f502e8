#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rrw {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // unbiased; 0 when n = 1
  double stderr_ = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("cannot summarise an empty sample");
  Summary s;
  s.n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.stderr_ = s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

/// Sample variance with the standard error of that estimate.
struct VarianceEstimate {
  double variance = 0.0;
  double stderr_ = 0.0;
};

inline VarianceEstimate estimate_variance(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (s.n < 2) throw std::invalid_argument("variance needs at least two samples");
  std::vector<double> sq(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) sq[k] = (xs[k] - s.mean) * (xs[k] - s.mean);
  const Summary q = summarize(sq);
  return {s.stddev * s.stddev, q.stderr_};
}

/// Comparison of two paired samples, a - b, for means or variances. Pairing
/// (common random numbers) is used in the standard error.
struct PairedComparison {
  double a = 0.0;
  double b = 0.0;
  double diff = 0.0;     // a - b
  double stderr_ = 0.0;  // standard error of diff

  /// a <= b up to `sigmas` standard errors.
  bool not_above(double sigmas = 3.0) const { return diff <= sigmas * stderr_; }
  /// a < b by more than `sigmas` standard errors.
  bool significantly_below(double sigmas = 3.0) const { return -diff > sigmas * stderr_; }
  double z() const { return stderr_ > 0.0 ? diff / stderr_ : 0.0; }
};

inline PairedComparison compare_means(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired comparison needs equal samples of size >= 2");
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  const Summary sd = summarize(d);
  return {summarize(a).mean, summarize(b).mean, sd.mean, sd.stderr_};
}

/// Unpaired comparison of means (independent samples).
inline PairedComparison compare_means_unpaired(std::span<const double> a,
                                               std::span<const double> b) {
  const Summary sa = summarize(a), sb = summarize(b);
  return {sa.mean, sb.mean, sa.mean - sb.mean,
          std::sqrt(sa.stderr_ * sa.stderr_ + sb.stderr_ * sb.stderr_)};
}

/// Var(a) - Var(b) on paired samples. The standard error is that of the
/// mean of (a_t - mean a)^2 - (b_t - mean b)^2.
inline PairedComparison compare_variances(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired comparison needs equal samples of size >= 2");
  const double ma = summarize(a).mean, mb = summarize(b).mean;
  const double n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    d[k] = (a[k] - ma) * (a[k] - ma) - (b[k] - mb) * (b[k] - mb);
  const Summary sd = summarize(d);
  const double scale = n / (n - 1.0);
  const double va = estimate_variance(a).variance, vb = estimate_variance(b).variance;
  return {va, vb, va - vb, sd.stderr_ * scale};
}

}  // namespace rrw
