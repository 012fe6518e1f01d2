#pragma once

#include "robust_unmix/types.hpp"

#include <cstdint>
#include <vector>

namespace robust_unmix {

/// Number of samples in the built-in endmember library.
inline constexpr Index kBuiltinBands = 200;

/// Six smooth reflectance-like spectra (sums of Gaussian bumps over a linear
/// baseline), kBuiltinBands x 6. Stand-in for a measured spectral library.
Endmembers builtin_library();

struct SceneSpec {
  /// Block size; the image is z^2 x z^2 pixels made of z x z blocks.
  int z = 8;
  Endmembers endmember_library = builtin_library();
  double mean_snr_db = 30.0;
  double snr_std_db = 5.0;
  /// Pixels whose largest abundance exceeds this are replaced by a 50/50 two-endmember mixture.
  double purity_threshold = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  SpectraMatrix Y_clean;
  SpectraMatrix Y_noisy;
  Abundances W_true;
  Endmembers X_true;
  std::vector<double> band_snr_db;
};

struct NoisyData {
  Matrix Y_noisy;
  std::vector<double> band_snr_db;
};

/// Draws the endmember label of each of the z x z blocks (row-major), uniform over K.
std::vector<int> draw_block_labels(int z, Index K, std::uint64_t seed);

/// One-hot abundances (K x z^4, pixels in row-major image order) from block labels.
Matrix block_abundances(int z, Index K, const std::vector<int>& labels);

/// Per-endmember (z+1) x (z+1) normalised box filter with replicate-edge padding.
Matrix smooth_abundances(const Matrix& W, int z);

/// Replaces every pixel whose largest abundance exceeds the threshold by 0.5
/// of its dominant endmember and 0.5 of a uniformly drawn different one.
Matrix replace_pure_pixels(const Matrix& W, double purity_threshold, std::uint64_t seed);

/// Full scene from explicit block labels (steps 3-5 of the protocol).
Scene generate_scene(const SceneSpec& spec, const std::vector<int>& labels);

/// Full scene: random block labels, smoothing, pure-pixel removal, per-band noise.
Scene generate_scene(const SceneSpec& spec);

/// Noise variance that gives the requested SNR for a band with this mean squared value.
double noise_variance_for_snr(double mean_square, double snr_db);

/// Per band d: SNR_d ~ Normal(mean, std^2), add i.i.d. zero-mean Gaussian
/// noise of variance mean(y^d o y^d) / 10^(SNR_d/10), clip negatives to 0.
NoisyData add_band_noise(const Matrix& Y_clean, double mean_snr_db, double snr_std_db, std::uint64_t seed);

/// Same as add_band_noise with the per-band SNR given explicitly.
NoisyData add_band_noise_with_snr(const Matrix& Y_clean, const std::vector<double>& band_snr_db, std::uint64_t seed);

/// 10 log10( sum(clean^2) / sum(noise^2) ) for one band.
double realized_snr_db(const Vector& clean, const Vector& noisy);

}  // namespace robust_unmix
