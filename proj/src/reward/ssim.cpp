#include "webrl/reward/ssim.hpp"

#include <Eigen/Core>

namespace webrl::reward {

namespace {

constexpr int kWindow = 8;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

Eigen::ArrayXXd to_luma(const core::Image& img) {
  Eigen::ArrayXXd y(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    const std::uint8_t* p = img.px(0, r);
    for (int c = 0; c < img.width; ++c) {
      y(r, c) = 0.299 * p[3 * c] + 0.587 * p[3 * c + 1] + 0.114 * p[3 * c + 2];
    }
  }
  return y;
}

double window_ssim(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) {
  const double mu_a = a.mean();
  const double mu_b = b.mean();
  const Eigen::ArrayXXd da = a - mu_a;
  const Eigen::ArrayXXd db = b - mu_b;
  const double var_a = da.square().mean();
  const double var_b = db.square().mean();
  const double cov = (da * db).mean();
  return ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
         ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
}

}  // namespace

double ssim(const core::Image& a, const core::Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch("ssim: images are " + std::to_string(a.width) + "x" +
                            std::to_string(a.height) + " vs " + std::to_string(b.width) +
                            "x" + std::to_string(b.height));
  if (a.rgb == b.rgb) return 1.0;

  const Eigen::ArrayXXd ya = to_luma(a);
  const Eigen::ArrayXXd yb = to_luma(b);

  if (a.width < kWindow || a.height < kWindow) return window_ssim(ya, yb);

  double acc = 0.0;
  long windows = 0;
  for (int r = 0; r + kWindow <= a.height; r += kWindow) {
    for (int c = 0; c + kWindow <= a.width; c += kWindow) {
      acc += window_ssim(ya.block(r, c, kWindow, kWindow),
                         yb.block(r, c, kWindow, kWindow));
      ++windows;
    }
  }
  return acc / double(windows);
}

}  // namespace webrl::reward
