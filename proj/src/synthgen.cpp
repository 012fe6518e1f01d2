#include "robust_unmix/synthgen.hpp"

#include "robust_unmix/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace robust_unmix {

namespace {

constexpr std::uint64_t kLabelStream = 1;
constexpr std::uint64_t kMixStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

struct Bump {
  double center;
  double width;
  double amplitude;
};

struct SpectrumShape {
  double base;
  double slope;
  std::array<Bump, 2> bumps;
};

// Negative amplitudes are absorption features; every shape stays well above zero.
constexpr std::array<SpectrumShape, 6> kShapes{{
    {0.06, 0.12, {{{0.25, 0.10, 0.05}, {0.75, 0.06, 0.04}}}},
    {0.20, 0.25, {{{0.45, 0.05, 0.20}, {0.85, 0.08, 0.10}}}},
    {0.35, -0.20, {{{0.15, 0.07, 0.25}, {0.60, 0.12, 0.15}}}},
    {0.55, 0.00, {{{0.35, 0.05, -0.30}, {0.70, 0.10, 0.15}}}},
    {0.15, 0.45, {{{0.65, 0.03, -0.10}, {0.20, 0.15, 0.12}}}},
    {0.30, 0.10, {{{0.50, 0.20, 0.30}, {0.90, 0.03, -0.15}}}},
}};

std::size_t image_side(int z) { return static_cast<std::size_t>(z) * static_cast<std::size_t>(z); }

}  // namespace

Endmembers builtin_library() {
  Matrix X(kBuiltinBands, static_cast<Index>(kShapes.size()));
  for (Index d = 0; d < kBuiltinBands; ++d) {
    const double t = static_cast<double>(d) / static_cast<double>(kBuiltinBands - 1);
    for (std::size_t k = 0; k < kShapes.size(); ++k) {
      const auto& s = kShapes[k];
      double value = s.base + s.slope * t;
      for (const auto& b : s.bumps) {
        const double x = (t - b.center) / b.width;
        value += b.amplitude * std::exp(-0.5 * x * x);
      }
      X(d, static_cast<Index>(k)) = value;
    }
  }
  return Endmembers(std::move(X));
}

void SceneSpec::validate() const {
  if (z < 2) throw ValidationError("block size z must be >= 2");
  if (endmember_library.count() < 2) throw ValidationError("scene needs at least two endmembers");
  if (!(purity_threshold > 0.0 && purity_threshold <= 1.0)) throw ValidationError("purity threshold must be in (0, 1]");
  if (!(snr_std_db >= 0.0) || !std::isfinite(snr_std_db)) throw ValidationError("SNR std must be finite and >= 0");
  if (!std::isfinite(mean_snr_db)) throw ValidationError("mean SNR must be finite");
}

std::vector<int> draw_block_labels(int z, Index K, std::uint64_t seed) {
  auto rng = make_rng(seed, {kLabelStream});
  std::uniform_int_distribution<int> pick(0, static_cast<int>(K) - 1);
  std::vector<int> labels(static_cast<std::size_t>(z) * static_cast<std::size_t>(z));
  for (auto& label : labels) label = pick(rng);
  return labels;
}

Matrix block_abundances(int z, Index K, const std::vector<int>& labels) {
  const std::size_t blocks = static_cast<std::size_t>(z);
  if (labels.size() != blocks * blocks) throw ShapeMismatch("expected z*z block labels");
  const std::size_t side = image_side(z);
  Matrix W = Matrix::Zero(K, static_cast<Index>(side * side));
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const int label = labels[(r / blocks) * blocks + c / blocks];
      if (label < 0 || label >= K) throw ValidationError("block label out of range");
      W(label, static_cast<Index>(r * side + c)) = 1.0;
    }
  }
  return W;
}

Matrix smooth_abundances(const Matrix& W, int z) {
  const auto side = static_cast<std::ptrdiff_t>(image_side(z));
  if (W.cols() != side * side) throw ShapeMismatch("abundance column count must be z^4");
  // Window of z+1 taps: offsets [-lo, hi] with lo + hi = z.
  const std::ptrdiff_t lo = z / 2;
  const std::ptrdiff_t hi = z - lo;
  const double norm = 1.0 / static_cast<double>((z + 1) * (z + 1));
  auto clamp = [side](std::ptrdiff_t i) { return std::clamp<std::ptrdiff_t>(i, 0, side - 1); };

  Matrix out(W.rows(), W.cols());
  for (Index k = 0; k < W.rows(); ++k) {
    for (std::ptrdiff_t r = 0; r < side; ++r) {
      for (std::ptrdiff_t c = 0; c < side; ++c) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -lo; i <= hi; ++i) {
          const std::ptrdiff_t rr = clamp(r + i);
          for (std::ptrdiff_t j = -lo; j <= hi; ++j) acc += W(k, rr * side + clamp(c + j));
        }
        out(k, r * side + c) = acc * norm;
      }
    }
  }
  return out;
}

Matrix replace_pure_pixels(const Matrix& W, double purity_threshold, std::uint64_t seed) {
  const Index K = W.rows();
  if (K < 2) throw ValidationError("pure-pixel replacement needs at least two endmembers");
  auto rng = make_rng(seed, {kMixStream});
  std::uniform_int_distribution<Index> pick(0, K - 2);
  Matrix out = W;
  for (Index n = 0; n < W.cols(); ++n) {
    Index dominant = 0;
    const double largest = W.col(n).maxCoeff(&dominant);
    if (!(largest > purity_threshold)) continue;
    Index partner = pick(rng);
    if (partner >= dominant) ++partner;
    out.col(n).setZero();
    out(dominant, n) = 0.5;
    out(partner, n) = 0.5;
  }
  return out;
}

double noise_variance_for_snr(double mean_square, double snr_db) { return mean_square / std::pow(10.0, snr_db / 10.0); }

NoisyData add_band_noise_with_snr(const Matrix& Y_clean, const std::vector<double>& band_snr_db, std::uint64_t seed) {
  check_nonnegative_finite(Y_clean);
  if (static_cast<Index>(band_snr_db.size()) != Y_clean.rows()) throw ShapeMismatch("one SNR value per band expected");
  const Index N = Y_clean.cols();
  NoisyData out{Matrix(Y_clean.rows(), N), band_snr_db};
  for (Index d = 0; d < Y_clean.rows(); ++d) {
    // Independent substream per band: (seed, noise stream, band index, 1).
    auto rng = make_rng(seed, {kNoiseStream, static_cast<std::uint64_t>(d), 1});
    std::normal_distribution<double> normal(0.0, 1.0);
    const double mean_square = Y_clean.row(d).squaredNorm() / static_cast<double>(N);
    const double stddev = std::sqrt(noise_variance_for_snr(mean_square, band_snr_db[static_cast<std::size_t>(d)]));
    for (Index n = 0; n < N; ++n) out.Y_noisy(d, n) = std::max(0.0, Y_clean(d, n) + stddev * normal(rng));
  }
  return out;
}

NoisyData add_band_noise(const Matrix& Y_clean, double mean_snr_db, double snr_std_db, std::uint64_t seed) {
  if (!(snr_std_db >= 0.0)) throw ValidationError("SNR std must be >= 0");
  std::vector<double> snr(static_cast<std::size_t>(Y_clean.rows()));
  for (std::size_t d = 0; d < snr.size(); ++d) {
    auto rng = make_rng(seed, {kNoiseStream, static_cast<std::uint64_t>(d), 0});
    std::normal_distribution<double> normal(0.0, 1.0);
    snr[d] = mean_snr_db + snr_std_db * normal(rng);
  }
  return add_band_noise_with_snr(Y_clean, snr, seed);
}

double realized_snr_db(const Vector& clean, const Vector& noisy) {
  return 10.0 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
}

Scene generate_scene(const SceneSpec& spec, const std::vector<int>& labels) {
  spec.validate();
  const Matrix& X = spec.endmember_library.data();
  const Index K = X.cols();
  Matrix W = block_abundances(spec.z, K, labels);
  W = smooth_abundances(W, spec.z);
  W = replace_pure_pixels(W, spec.purity_threshold, spec.seed);
  Matrix Y = X * W;
  NoisyData noisy = add_band_noise(Y, spec.mean_snr_db, spec.snr_std_db, spec.seed);
  return Scene{SpectraMatrix(std::move(Y)), SpectraMatrix(std::move(noisy.Y_noisy)), Abundances(std::move(W)),
               spec.endmember_library, std::move(noisy.band_snr_db)};
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  return generate_scene(spec, draw_block_labels(spec.z, spec.endmember_library.count(), spec.seed));
}

}  // namespace robust_unmix
