#pragma once

#include "webrl/core/error.hpp"
#include "webrl/core/image.hpp"

namespace webrl::reward {

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Mean local SSIM over 8x8 windows at stride 8 (windows fully inside the
// image; images smaller than one window fall back to a single global window).
// Inputs are converted to grayscale via the BT.601 luma combination.
// C1 = (0.01*255)^2, C2 = (0.03*255)^2. Byte-identical inputs short-circuit
// to exactly 1.0. Throws DimensionMismatch on unequal dimensions.
double ssim(const core::Image& a, const core::Image& b);

}  // namespace webrl::reward
