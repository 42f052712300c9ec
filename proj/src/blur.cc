#include "hsense/blur.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/status/status.h"
#include "hsense/strings.h"

namespace hsense {

absl::StatusOr<GrayImage> MakeGrayImage(
    const std::vector<std::vector<int>>& rows) {
  if (rows.empty() || rows[0].empty()) {
    return absl::InvalidArgumentError("empty image");
  }
  GrayImage img;
  img.height = static_cast<int>(rows.size());
  img.width = static_cast<int>(rows[0].size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != img.width) {
      return absl::InvalidArgumentError("ragged rows");
    }
    for (int v : row) {
      if (v < 0 || v > 255) {
        return absl::InvalidArgumentError("intensity out of range");
      }
      img.pixels.push_back(static_cast<std::uint8_t>(v));
    }
  }
  return img;
}

absl::StatusOr<double> EdgeSharpness(const GrayImage& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() !=
          static_cast<std::size_t>(image.width) * image.height) {
    return absl::InvalidArgumentError("empty or inconsistent image");
  }
  double sum = 0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const int xi = image.at(x, y);
      int best = std::numeric_limits<int>::min();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= image.width ||
              ny >= image.height) {
            continue;
          }
          best = std::max(best, xi - image.at(nx, ny));
        }
      }
      if (best != std::numeric_limits<int>::min()) sum += best;
    }
  }
  return sum / static_cast<double>(image.pixels.size());
}

absl::StatusOr<double> Blurriness(const GrayImage& original,
                                  const GrayImage& blurred) {
  absl::StatusOr<double> x = EdgeSharpness(original);
  if (!x.ok()) return x.status();
  absl::StatusOr<double> y = EdgeSharpness(blurred);
  if (!y.ok()) return y.status();
  if (*x == 0) {
    return absl::FailedPreconditionError(
        "original has zero edge sharpness; metric undefined");
  }
  return std::abs(*x - *y) / *x;
}

std::uint8_t Luma(int r, int g, int b) {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b) / 1000);
}

absl::StatusOr<GrayImage> ParsePnm(std::string_view text) {
  // Strip comments, then read whitespace-separated tokens.
  std::string clean;
  bool comment = false;
  for (char c : text) {
    if (c == '#') comment = true;
    if (c == '\n' || c == '\r') comment = false;
    clean += comment ? ' ' : c;
  }
  std::istringstream in(clean);
  std::string magic;
  long width = 0, height = 0, maxval = 0;
  if (!(in >> magic >> width >> height >> maxval)) {
    return absl::InvalidArgumentError("truncated PNM header");
  }
  if (magic != "P2" && magic != "P3") {
    return absl::InvalidArgumentError(Cat("unsupported PNM type ", magic));
  }
  if (width < 1 || height < 1 || width > 1 << 15 || height > 1 << 15 ||
      maxval < 1 || maxval > 65535) {
    return absl::InvalidArgumentError("bad PNM dimensions or maxval");
  }
  const int channels = magic == "P3" ? 3 : 1;
  GrayImage img;
  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.pixels.reserve(static_cast<std::size_t>(width) * height);
  for (long i = 0; i < width * height; ++i) {
    int c[3];
    for (int k = 0; k < channels; ++k) {
      long v;
      if (!(in >> v) || v < 0 || v > maxval) {
        return absl::InvalidArgumentError("bad or missing PNM sample");
      }
      c[k] = static_cast<int>(maxval == 255 ? v : v * 255 / maxval);
    }
    img.pixels.push_back(channels == 3 ? Luma(c[0], c[1], c[2])
                                       : static_cast<std::uint8_t>(c[0]));
  }
  return img;
}

absl::StatusOr<GrayImage> ReadPnm(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParsePnm(buf.str());
}

}  // namespace hsense
