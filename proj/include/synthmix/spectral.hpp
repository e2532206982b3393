#pragma once
// Radially averaged power spectral density (RAPSD) of image sets, an l2
// distance between mean profiles, and a log-log decay-exponent fit, composed
// into a ratio plan.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthmix/bounds.hpp"

namespace synthmix {

/// Row-major grayscale image; at least 8x8 and finite.
class ImageMatrix {
 public:
  ImageMatrix(int rows, int cols, std::vector<double> pixels, std::string id = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::string& id() const { return id_; }
  std::span<const double> pixels() const { return pixels_; }
  double at(int r, int c) const { return pixels_[static_cast<std::size_t>(r) * cols_ + c]; }

  ImageMatrix transposed() const;
  ImageMatrix scaled(double factor) const;

 private:
  int rows_;
  int cols_;
  std::vector<double> pixels_;
  std::string id_;
};

struct RapsdProfile {
  std::vector<double> radii;  // integer radius in cycles per image side, from 1
  std::vector<double> power;  // mean |F|^2 / (H W) over the bin
  std::vector<int> counts;
  /// Sum of |F|^2 / (H W) over the whole plane before any bin is dropped;
  /// equals the sum of squared mean-subtracted pixels.
  double total_power = 0.0;
};

struct FitRange {
  double lo = 2.0;
  /// Upper radius; unset means half the largest radius in the profile.
  std::optional<double> hi;
};

struct DecayFit {
  double r_hat = 0.0;
  double intercept = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double residual_rms = 0.0;
  int bins_used = 0;
};

RapsdProfile rapsd(const ImageMatrix& img);

/// Bin-wise mean of per-image profiles; per-image transforms may run on
/// `jobs` threads without changing the result.
RapsdProfile mean_rapsd(std::span<const ImageMatrix> set, int jobs = 1);

/// Euclidean norm of the difference of two profiles over their common bins.
double profile_distance(const RapsdProfile& a, const RapsdProfile& b);

double spectral_distance(std::span<const ImageMatrix> real_set,
                         std::span<const ImageMatrix> synth_set, int jobs = 1);

/// OLS of log power on log radius; r_hat = -slope / 2. Bins with
/// nonpositive power are skipped; fewer than 4 usable bins is an error.
DecayFit fit_decay_exponent(const RapsdProfile& profile, const FitRange& range = {});

/// Population variance of all pixels in the set.
double pixel_variance(std::span<const ImageMatrix> set);

struct SpectralPlan {
  double distance = 0.0;
  DecayFit fit;
  double sigma2 = 0.0;
  int n = 0;
  RatioPlan plan;
};

struct SpectralPlanOptions {
  /// Used unless sigma2_from_pixels is set.
  double sigma2 = 0.0;
  bool sigma2_from_pixels = false;
  FitRange range;
  int jobs = 1;
};

/// distance -> D, decay fit of the real set -> r, then the numeric planner.
/// Identical sets give D = 0 and an unbounded plan.
SpectralPlan plan_from_images(std::span<const ImageMatrix> real_set,
                              std::span<const ImageMatrix> synth_set, int n,
                              const SpectralPlanOptions& options);

/// Gaussian random field whose Fourier amplitude falls off as radius^(-r0)
/// (power as radius^(-2 r0)), obtained by filtering white noise.
ImageMatrix power_law_field(int rows, int cols, double r0, std::uint64_t seed);

// Image files: 8-bit PNG (colour converted with luma weights 0.299, 0.587,
// 0.114) or plain numeric CSV matrices.
ImageMatrix load_image(const std::filesystem::path& path);
/// Every *.png / *.csv in the directory, sorted by file name.
std::vector<ImageMatrix> load_image_dir(const std::filesystem::path& dir);
void save_csv_image(const std::filesystem::path& path, const ImageMatrix& img);
/// Writes 8-bit grayscale; pixel values are rounded and clamped to [0, 255].
void save_png_gray(const std::filesystem::path& path, const ImageMatrix& img);

}  // namespace synthmix
