#include "hsfuse/metrics.hpp"

#include <cmath>
#include <limits>

namespace hsfuse {

namespace {

Eigen::MatrixXd gaussian_window(int size, double sigma) {
  Eigen::MatrixXd w(size, size);
  const int c = size / 2;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      w(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2.0 * sigma * sigma));
  w /= w.sum();
  return w;
}

}  // namespace

double psnr(const SpectralCube& ref, const SpectralCube& est, double peak) {
  require(ref.same_dims(est), "PSNR operands have different dimensions");
  const double mse = (ref.data - est.data).square().mean();
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const GrayImage& ref, const GrayImage& est, double peak) {
  require(ref.rows == est.rows && ref.cols == est.cols,
          "SSIM operands have different dimensions");
  constexpr int kWindow = 11;
  constexpr double kSigma = 1.5;
  require(ref.rows >= kWindow && ref.cols >= kWindow, "image smaller than SSIM window");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  static const Eigen::MatrixXd window = gaussian_window(kWindow, kSigma);

  const auto x = ref.mat();
  const auto y = est.mat();
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i + kWindow <= ref.rows; ++i)
    for (int j = 0; j + kWindow <= ref.cols; ++j) {
      const auto bx = x.block(i, j, kWindow, kWindow).array();
      const auto by = y.block(i, j, kWindow, kWindow).array();
      const double mx = (window.array() * bx).sum();
      const double my = (window.array() * by).sum();
      const double vx = (window.array() * bx.square()).sum() - mx * mx;
      const double vy = (window.array() * by.square()).sum() - my * my;
      const double cov = (window.array() * bx * by).sum() - mx * my;
      acc += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return acc / count;
}

double ssim(const SpectralCube& ref, const SpectralCube& est, double peak) {
  require(ref.same_dims(est), "SSIM operands have different dimensions");
  double acc = 0.0;
  for (int l = 0; l < ref.bands; ++l) {
    GrayImage a(ref.rows, ref.cols), b(ref.rows, ref.cols);
    a.mat() = ref.band(l);
    b.mat() = est.band(l);
    acc += ssim(a, b, peak);
  }
  return acc / ref.bands;
}

double sam(const SpectralCube& ref, const SpectralCube& est) {
  require(ref.same_dims(est), "SAM operands have different dimensions");
  double acc = 0.0;
  int count = 0;
  const Eigen::Index plane = static_cast<Eigen::Index>(ref.rows) * ref.cols;
  Eigen::Map<const Eigen::MatrixXd> r(ref.data.data(), plane, ref.bands);
  Eigen::Map<const Eigen::MatrixXd> e(est.data.data(), plane, ref.bands);
  for (Eigen::Index pix = 0; pix < plane; ++pix) {
    const double nr = r.row(pix).norm();
    const double ne = e.row(pix).norm();
    if (nr == 0.0 || ne == 0.0) continue;
    double cosine = r.row(pix).dot(e.row(pix)) / (nr * ne);
    cosine = std::clamp(cosine, -1.0, 1.0);
    acc += std::acos(cosine);
    ++count;
  }
  require(count > 0, "SAM undefined: every pixel spectrum is zero");
  return acc / count;
}

MetricReport evaluate(const SpectralCube& ref, const SpectralCube& est, double peak) {
  return {psnr(ref, est, peak), ssim(ref, est, peak), sam(ref, est)};
}

}  // namespace hsfuse
