#include "gbpn/depth_grid.hpp"

#include <algorithm>
#include <string>

#include "gbpn/error.hpp"

namespace gbpn {

DepthGrid::DepthGrid(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0) {
    throw DimensionError("grid dimensions must be positive, got " + std::to_string(height) +
                         "x" + std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    throw DimensionError("grid channels must be 1 or 3, got " + std::to_string(channels));
  }
  data_.assign(pixel_count() * channels_, 0.0);
  valid_.assign(pixel_count(), 0);
}

void DepthGrid::set_all_valid(bool v) { std::fill(valid_.begin(), valid_.end(), v ? 1 : 0); }

std::size_t DepthGrid::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

}  // namespace gbpn
