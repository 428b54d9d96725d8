#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gbpn {

using PixelIndex = std::uint32_t;

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Dense row-major raster with a per-pixel validity mask. Channels are
// interleaved: value(r, c, ch) lives at ((r * width) + c) * channels + ch.
// Used for guide images (3 channels in [0,1]), sparse inputs, ground truth
// and solver outputs (1 channel, meters).
class DepthGrid {
 public:
  DepthGrid() = default;
  DepthGrid(int height, int width, int channels = 1);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

  PixelIndex index(int row, int col) const {
    return static_cast<PixelIndex>(row * width_ + col);
  }
  Pixel pixel(PixelIndex i) const {
    return {static_cast<int>(i) / width_, static_cast<int>(i) % width_};
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  double& at(int row, int col, int ch = 0) { return data_[offset(row, col, ch)]; }
  double at(int row, int col, int ch = 0) const { return data_[offset(row, col, ch)]; }
  double& at(PixelIndex i, int ch = 0) { return data_[i * channels_ + ch]; }
  double at(PixelIndex i, int ch = 0) const { return data_[i * channels_ + ch]; }

  bool valid(int row, int col) const { return valid_[index(row, col)] != 0; }
  bool valid(PixelIndex i) const { return valid_[i] != 0; }
  void set_valid(int row, int col, bool v) { valid_[index(row, col)] = v ? 1 : 0; }
  void set_valid(PixelIndex i, bool v) { valid_[i] = v ? 1 : 0; }
  void set_all_valid(bool v);

  std::size_t valid_count() const;
  bool same_shape(const DepthGrid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<const std::uint8_t> mask() const { return valid_; }

  friend bool operator==(const DepthGrid&, const DepthGrid&) = default;

 private:
  std::size_t offset(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace gbpn
