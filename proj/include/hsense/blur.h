#ifndef HSENSE_BLUR_H_
#define HSENSE_BLUR_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace hsense {

// Row-major 8-bit intensities.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const { return pixels[y * width + x]; }
};

absl::StatusOr<GrayImage> MakeGrayImage(
    const std::vector<std::vector<int>>& rows);

// Mean over pixels of max over the 8-neighbourhood of (x_i - x_j). The
// per-pixel term is the signed max (negative at a strict local minimum);
// a pixel with no neighbours contributes 0.
absl::StatusOr<double> EdgeSharpness(const GrayImage& image);

// |X - Y| / X for X = EdgeSharpness(original), Y = EdgeSharpness(blurred).
// The images may differ in size. X = 0 is an error.
absl::StatusOr<double> Blurriness(const GrayImage& original,
                                  const GrayImage& blurred);

// Integer luma, floor((299 r + 587 g + 114 b) / 1000).
std::uint8_t Luma(int r, int g, int b);

// Plain-text P2 (graymap) or P3 (pixmap, converted by Luma). Samples are
// rescaled to 0..255 when maxval differs.
absl::StatusOr<GrayImage> ParsePnm(std::string_view text);
absl::StatusOr<GrayImage> ReadPnm(const std::string& path);

}  // namespace hsense

#endif  // HSENSE_BLUR_H_
