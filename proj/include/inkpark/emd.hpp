#pragma once

#include <array>
#include <span>
#include <vector>

#include "inkpark/signal_io.hpp"

namespace inkpark {

struct EmdConfig {
  double sd_threshold = 0.2;  // stop sifting when sum (h_prev - h)^2 / sum h_prev^2 < this
  int max_sifts = 50;
  int max_imfs = 8;
};

struct EmdResult {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residual;
};

inline constexpr std::size_t kEmdMinLength = 8;

/// Empirical mode decomposition by sifting with natural cubic spline
/// envelopes through the local extrema, mirrored at both ends. Decomposition
/// stops when the residual is monotone, has fewer than 2 extrema, or after
/// max_imfs IMFs. The IMFs and residual sum to the input.
EmdResult emd(std::span<const double> series, const EmdConfig& config = {});

/// Local extrema indices. Plateaus count once, at their centre.
struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};
Extrema find_extrema(std::span<const double> series);

/// Natural cubic spline through (xs, ys), evaluated at each of `at`.
/// xs must be strictly increasing with at least 2 knots.
std::vector<double> natural_cubic_spline(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> at);

/// energy/entropy of IMF 1..3 (0 when missing) followed by the IMF count:
/// {e1, h1, e2, h2, e3, h3, count}.
using EmdFeatures = std::array<double, 7>;
inline constexpr std::array<const char*, 7> kEmdFeatureNames{
    "imf1_energy", "imf1_entropy", "imf2_energy", "imf2_entropy",
    "imf3_energy", "imf3_entropy", "imf_count"};

EmdFeatures emd_features(std::span<const double> series, const EmdConfig& config = {});
/// Features of the whole-trial resultant velocity.
EmdFeatures emd_features(const Trial& trial, const EmdConfig& config = {});

}  // namespace inkpark
