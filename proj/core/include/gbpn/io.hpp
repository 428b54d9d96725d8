#pragma once

#include <cstdint>
#include <filesystem>

#include "gbpn/depth_grid.hpp"

namespace gbpn {

// KITTI-style quantisation: depth = value / 256 m.
inline constexpr double kKittiDepthScale = 1.0 / 256.0;
// Normalised 16-bit guide: intensity = value / 65535.
inline constexpr double kGuideScale = 1.0 / 65535.0;

// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). Value 0 is the
// invalid sentinel; everything else maps to value * scale.
DepthGrid read_pgm(const std::filesystem::path& path, double scale);
// Writes round(value / scale); invalid pixels become 0. Values that would
// quantise outside 1..65535 raise ParameterError.
void write_pgm(const std::filesystem::path& path, const DepthGrid& grid, double scale);

// Portable float map, 1 ("Pf") or 3 ("PF") channels. Rows are stored bottom
// to top; a negative scale marks little-endian data. NaN encodes invalid
// pixels (any channel NaN invalidates the pixel on read).
DepthGrid read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthGrid& grid);

// Sparse points as "row,col,depth_m" lines. Duplicates keep the last value
// (with a warning); blank lines and lines starting with '#' are ignored.
DepthGrid read_sparse_csv(const std::filesystem::path& path, int height, int width);
void write_sparse_csv(const std::filesystem::path& path, const DepthGrid& grid);

// Uniform sample of n_points valid pixels without replacement, deterministic
// for a fixed seed.
DepthGrid sample_sparse(const DepthGrid& gt, std::size_t n_points, std::uint64_t seed);

// Reads a raster by extension: .pfm, .pgm (depth uses `pgm_scale`) or .csv
// (needs height/width).
DepthGrid read_depth(const std::filesystem::path& path, double pgm_scale = kKittiDepthScale,
                     int height = 0, int width = 0);
void write_depth(const std::filesystem::path& path, const DepthGrid& grid,
                 double pgm_scale = kKittiDepthScale);

// Guide image: .pfm (1 or 3 channels) or .pgm normalised to [0,1]. Every
// pixel is marked valid.
DepthGrid read_guide(const std::filesystem::path& path);

}  // namespace gbpn
