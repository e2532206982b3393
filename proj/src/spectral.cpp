#include "synthmix/spectral.hpp"

#include <fftw3.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <sstream>

#include "synthmix/error.hpp"
#include "synthmix/mercer.hpp"
#include "synthmix/parallel.hpp"
#include "synthmix/simd.hpp"

namespace synthmix {
namespace {

// The FFTW planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw NumericError("fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// In-place 2-D DFT of a row-major complex buffer.
void fft2(fftw_complex* buf, int rows, int cols, int sign) {
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(rows, cols, buf, buf, sign, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericError("FFTW could not create a plan");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

// Signed frequency of DFT index i along an axis of length n.
int signed_freq(int i, int n) { return i < (n + 1) / 2 ? i : i - n; }

void check_same_shape(std::span<const ImageMatrix> set, const char* what) {
  if (set.empty()) throw ArgumentError(std::string(what) + ": image set is empty");
  for (const auto& img : set) {
    if (img.rows() != set.front().rows() || img.cols() != set.front().cols()) {
      throw ArgumentError(std::string(what) + ": images differ in size (" + img.id() + ")");
    }
  }
}

}  // namespace

ImageMatrix::ImageMatrix(int rows, int cols, std::vector<double> pixels, std::string id)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)), id_(std::move(id)) {
  if (rows < 8 || cols < 8) {
    throw ArgumentError("image " + id_ + " is smaller than 8x8");
  }
  if (pixels_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw ArgumentError("image " + id_ + ": pixel count does not match dimensions");
  }
  for (double p : pixels_) {
    if (!std::isfinite(p)) throw ArgumentError("image " + id_ + " has non-finite pixels");
  }
}

ImageMatrix ImageMatrix::transposed() const {
  std::vector<double> t(pixels_.size());
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t[static_cast<std::size_t>(c) * rows_ + r] = at(r, c);
  return ImageMatrix(cols_, rows_, std::move(t), id_);
}

ImageMatrix ImageMatrix::scaled(double factor) const {
  std::vector<double> s(pixels_);
  for (auto& p : s) p *= factor;
  return ImageMatrix(rows_, cols_, std::move(s), id_);
}

RapsdProfile rapsd(const ImageMatrix& img) {
  const int h = img.rows();
  const int w = img.cols();
  const std::size_t n = static_cast<std::size_t>(h) * w;

  double mean = 0.0;
  for (double p : img.pixels()) mean += p;
  mean /= static_cast<double>(n);

  FftwBuffer buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.data[i][0] = img.pixels()[i] - mean;
    buf.data[i][1] = 0.0;
  }
  fft2(buf.data, h, w, FFTW_FORWARD);

  std::vector<double> power(n);
  simd::squared_magnitude(std::span<const double>(&buf.data[0][0], 2 * n),
                          1.0 / static_cast<double>(n), power);

  const int k_max = std::min(h, w) / 2;
  RapsdProfile prof;
  std::vector<double> sums(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k_max) + 1, 0);
  double total = 0.0;
  for (int i = 0; i < h; ++i) {
    const double fu = signed_freq(i, h);
    for (int j = 0; j < w; ++j) {
      const double fv = signed_freq(j, w);
      const double p = power[static_cast<std::size_t>(i) * w + j];
      total += p;
      const auto k = static_cast<long>(std::lround(std::sqrt(fu * fu + fv * fv)));
      if (k < 1 || k > k_max) continue;
      sums[k] += p;
      counts[k] += 1;
    }
  }
  prof.total_power = total;
  for (int k = 1; k <= k_max; ++k) {
    if (counts[k] == 0) continue;
    prof.radii.push_back(k);
    prof.power.push_back(sums[k] / counts[k]);
    prof.counts.push_back(counts[k]);
  }
  return prof;
}

RapsdProfile mean_rapsd(std::span<const ImageMatrix> set, int jobs) {
  check_same_shape(set, "mean_rapsd");
  std::vector<RapsdProfile> each(set.size());
  parallel_for(set.size(), jobs, [&](std::size_t i) { each[i] = rapsd(set[i]); });

  RapsdProfile mean = each.front();
  for (std::size_t i = 1; i < each.size(); ++i) {
    for (std::size_t k = 0; k < mean.power.size(); ++k) mean.power[k] += each[i].power[k];
    mean.total_power += each[i].total_power;
  }
  const double inv = 1.0 / static_cast<double>(each.size());
  for (auto& p : mean.power) p *= inv;
  mean.total_power *= inv;
  return mean;
}

double profile_distance(const RapsdProfile& a, const RapsdProfile& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  double acc = 0.0;
  while (i < a.radii.size() && j < b.radii.size()) {
    if (a.radii[i] < b.radii[j]) {
      ++i;
    } else if (b.radii[j] < a.radii[i]) {
      ++j;
    } else {
      const double d = a.power[i] - b.power[j];
      acc += d * d;
      ++i;
      ++j;
    }
  }
  return std::sqrt(acc);
}

double spectral_distance(std::span<const ImageMatrix> real_set,
                         std::span<const ImageMatrix> synth_set, int jobs) {
  return profile_distance(mean_rapsd(real_set, jobs), mean_rapsd(synth_set, jobs));
}

DecayFit fit_decay_exponent(const RapsdProfile& profile, const FitRange& range) {
  if (profile.radii.empty()) throw ArgumentError("decay fit: empty profile");
  DecayFit fit;
  fit.fit_lo = range.lo;
  fit.fit_hi = range.hi.value_or(profile.radii.back() / 2.0);
  if (!(fit.fit_hi > fit.fit_lo)) throw ArgumentError("decay fit: empty radius range");

  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    const double rad = profile.radii[k];
    if (rad < fit.fit_lo || rad > fit.fit_hi || !(profile.power[k] > 0.0)) continue;
    lx.push_back(std::log(rad));
    ly.push_back(std::log(profile.power[k]));
  }
  if (lx.size() < 4) {
    throw ArgumentError("decay fit: fewer than 4 usable radial bins in [" +
                        std::to_string(fit.fit_lo) + ", " + std::to_string(fit.fit_hi) + "]");
  }
  const double m = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  fit.intercept = my - slope * mx;
  fit.r_hat = -slope / 2.0;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + slope * lx[i]);
    rss += e * e;
  }
  fit.residual_rms = std::sqrt(rss / m);
  fit.bins_used = static_cast<int>(lx.size());
  return fit;
}

double pixel_variance(std::span<const ImageMatrix> set) {
  if (set.empty()) throw ArgumentError("pixel_variance: image set is empty");
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  for (const auto& img : set) {
    for (double p : img.pixels()) {
      n += 1.0;
      const double d = p - mean;
      mean += d / n;
      m2 += d * (p - mean);
    }
  }
  return m2 / n;
}

SpectralPlan plan_from_images(std::span<const ImageMatrix> real_set,
                              std::span<const ImageMatrix> synth_set, int n,
                              const SpectralPlanOptions& options) {
  const auto real_profile = mean_rapsd(real_set, options.jobs);
  const auto synth_profile = mean_rapsd(synth_set, options.jobs);

  SpectralPlan out;
  out.n = n;
  out.distance = profile_distance(real_profile, synth_profile);
  out.fit = fit_decay_exponent(real_profile, options.range);
  out.sigma2 = options.sigma2_from_pixels ? pixel_variance(real_set) : options.sigma2;
  if (!(out.fit.r_hat >= 0.5)) {
    throw ArgumentError("estimated decay exponent r_hat = " + std::to_string(out.fit.r_hat) +
                        " is below 0.5; the spectrum is too flat for the bound");
  }
  KernelBoundInputs in{n, out.fit.r_hat, out.sigma2, out.distance, 0.0};
  if (out.distance == 0.0) {
    out.plan = lambda_star_closed_form(in, ClosedFormVariant::kRateOnly);
    out.plan.source = PlanSource::kNumeric;
  } else {
    out.plan = lambda_star_numeric(in);
  }
  return out;
}

ImageMatrix power_law_field(int rows, int cols, double r0, std::uint64_t seed) {
  if (rows < 8 || cols < 8) throw ArgumentError("power_law_field: size below 8x8");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const auto noise = gaussian_noise(n, 1.0, seed, 0x5EC7);
  FftwBuffer buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf.data[i][0] = noise[i];
    buf.data[i][1] = 0.0;
  }
  fft2(buf.data, rows, cols, FFTW_FORWARD);
  for (int i = 0; i < rows; ++i) {
    const double fu = signed_freq(i, rows);
    for (int j = 0; j < cols; ++j) {
      const double fv = signed_freq(j, cols);
      const double k = std::sqrt(fu * fu + fv * fv);
      const double gain = k == 0.0 ? 0.0 : std::pow(k, -r0);
      auto* z = buf.data[static_cast<std::size_t>(i) * cols + j];
      z[0] *= gain;
      z[1] *= gain;
    }
  }
  fft2(buf.data, rows, cols, FFTW_BACKWARD);
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = buf.data[i][0] / static_cast<double>(n);
  return ImageMatrix(rows, cols, std::move(px), "power_law_field");
}

namespace {

ImageMatrix load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> raw(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  const int h = static_cast<int>(image.height);
  const int w = static_cast<int>(image.width);
  std::vector<double> px(static_cast<std::size_t>(h) * w);
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (colour) {
      px[i] = 0.299 * raw[3 * i] + 0.587 * raw[3 * i + 1] + 0.114 * raw[3 * i + 2];
    } else {
      px[i] = raw[i];
    }
  }
  return ImageMatrix(h, w, std::move(px), path.filename().string());
}

ImageMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> px;
  int rows = 0;
  int cols = -1;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int count = 0;
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw IoError(path.string() + ": row " + std::to_string(rows + 1) +
                      " has a non-numeric entry '" + tok + "'");
      }
      px.push_back(v);
      ++count;
    }
    if (count == 0) continue;
    if (cols >= 0 && count != cols) {
      throw IoError(path.string() + ": row " + std::to_string(rows + 1) + " has " +
                    std::to_string(count) + " columns, expected " + std::to_string(cols));
    }
    cols = count;
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": no data");
  return ImageMatrix(rows, cols, std::move(px), path.filename().string());
}

std::string lower_ext(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

ImageMatrix load_image(const std::filesystem::path& path) {
  const auto ext = lower_ext(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".csv") return load_csv(path);
  throw IoError("unsupported image format: " + path.string());
}

std::vector<ImageMatrix> load_image_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower_ext(entry.path());
    if (ext == ".png" || ext == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw IoError("no .png or .csv images in " + dir.string());
  std::vector<ImageMatrix> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_image(f));
  return out;
}

void save_csv_image(const std::filesystem::path& path, const ImageMatrix& img) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (int r = 0; r < img.rows(); ++r) {
    for (int c = 0; c < img.cols(); ++c) {
      if (c) out << ',';
      out << img.at(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_png_gray(const std::filesystem::path& path, const ImageMatrix& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.cols());
  image.height = static_cast<png_uint_32>(img.rows());
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> raw(img.pixels().size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<png_byte>(std::clamp(std::lround(img.pixels()[i]), 0L, 255L));
  }
  if (png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr) == 0) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace synthmix
