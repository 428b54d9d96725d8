#include "gbpn/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gbpn/error.hpp"

namespace gbpn {

namespace {

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::string& header,
           const std::vector<char>& payload) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(header.data(), static_cast<std::streamsize>(header.size()));
  file.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!file) throw IoError("failed writing " + path.string());
}

// Netpbm-style header tokenizer: whitespace separated, '#' comments.
class HeaderReader {
 public:
  HeaderReader(const std::vector<char>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      out.push_back(bytes_[pos_++]);
    }
    if (out.empty()) throw ParseError(name_ + ": truncated header");
    return out;
  }

  long integer() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) throw ParseError(name_ + ": bad header field '" + t + "'");
    return v;
  }

  double real() {
    const std::string t = token();
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v) || v == 0.0) {
      throw ParseError(name_ + ": bad scale field '" + t + "'");
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError(name_ + ": missing separator before raster data");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

bool host_little_endian() { return std::endian::native == std::endian::little; }

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

DepthGrid read_pgm(const std::filesystem::path& path, double scale) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path.string());
  if (header.token() != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  const long width = header.integer();
  const long height = header.integer();
  const long maxval = header.integer();
  if (maxval != 65535) {
    throw ParseError(path.string() + ": maxval must be 65535, got " + std::to_string(maxval));
  }
  const std::size_t start = header.payload_start();
  const std::size_t expected = static_cast<std::size_t>(width) * height * 2;
  if (bytes.size() - start != expected) {
    throw ParseError(path.string() + ": header declares " + std::to_string(expected) +
                     " raster bytes, file holds " + std::to_string(bytes.size() - start));
  }
  DepthGrid grid(static_cast<int>(height), static_cast<int>(width), 1);
  for (PixelIndex i = 0; i < grid.pixel_count(); ++i) {
    const auto hi = static_cast<unsigned char>(bytes[start + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[start + 2 * i + 1]);
    const unsigned value = (hi << 8) | lo;
    grid.at(i) = value == 0 ? 0.0 : value * scale;
    grid.set_valid(i, value != 0);
  }
  return grid;
}

void write_pgm(const std::filesystem::path& path, const DepthGrid& grid, double scale) {
  if (grid.channels() != 1) throw DimensionError("PGM output needs a single-channel grid");
  if (!(scale > 0)) throw ParameterError("PGM scale must be positive");
  std::vector<char> payload(grid.pixel_count() * 2, 0);
  for (PixelIndex i = 0; i < grid.pixel_count(); ++i) {
    if (!grid.valid(i)) continue;
    const double q = std::round(grid.at(i) / scale);
    if (!(q >= 1.0 && q <= 65535.0)) {
      throw ParameterError("value " + std::to_string(grid.at(i)) + " at pixel " +
                           std::to_string(i) + " does not fit a 16-bit PGM at this scale");
    }
    const auto v = static_cast<std::uint16_t>(q);
    payload[2 * i] = static_cast<char>(v >> 8);
    payload[2 * i + 1] = static_cast<char>(v & 0xFF);
  }
  const std::string header =
      "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n65535\n";
  spill(path, header, payload);
}

DepthGrid read_pfm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path.string());
  const std::string kind = header.token();
  int channels = 0;
  if (kind == "Pf") {
    channels = 1;
  } else if (kind == "PF") {
    channels = 3;
  } else {
    throw ParseError(path.string() + ": not a PFM file");
  }
  const long width = header.integer();
  const long height = header.integer();
  const double scale = header.real();
  const bool little = scale < 0;
  const std::size_t start = header.payload_start();
  const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start != samples * 4) {
    throw ParseError(path.string() + ": header declares " + std::to_string(samples * 4) +
                     " raster bytes, file holds " + std::to_string(bytes.size() - start));
  }

  DepthGrid grid(static_cast<int>(height), static_cast<int>(width), channels);
  grid.set_all_valid(true);
  for (int file_row = 0; file_row < height; ++file_row) {
    const int row = static_cast<int>(height) - 1 - file_row;
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const std::size_t k = (static_cast<std::size_t>(file_row) * width + c) * channels + ch;
        std::array<unsigned char, 4> raw{};
        std::memcpy(raw.data(), bytes.data() + start + 4 * k, 4);
        if (little != host_little_endian()) std::reverse(raw.begin(), raw.end());
        const float v = std::bit_cast<float>(raw);
        if (std::isnan(v)) {
          grid.set_valid(row, c, false);
          grid.at(row, c, ch) = 0.0;
        } else {
          grid.at(row, c, ch) = v;
        }
      }
    }
  }
  // A pixel with one NaN channel is invalid as a whole.
  for (PixelIndex i = 0; i < grid.pixel_count(); ++i) {
    if (!grid.valid(i)) {
      for (int ch = 0; ch < channels; ++ch) grid.at(i, ch) = 0.0;
    }
  }
  return grid;
}

void write_pfm(const std::filesystem::path& path, const DepthGrid& grid) {
  const int channels = grid.channels();
  const int h = grid.height();
  const int w = grid.width();
  std::vector<char> payload(grid.pixel_count() * channels * 4);
  std::size_t k = 0;
  for (int row = h - 1; row >= 0; --row) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch, ++k) {
        const float v = grid.valid(row, c) ? static_cast<float>(grid.at(row, c, ch))
                                           : std::numeric_limits<float>::quiet_NaN();
        auto raw = std::bit_cast<std::array<unsigned char, 4>>(v);
        if (!host_little_endian()) std::reverse(raw.begin(), raw.end());
        std::memcpy(payload.data() + 4 * k, raw.data(), 4);
      }
    }
  }
  const std::string header = std::string(channels == 3 ? "PF" : "Pf") + "\n" +
                             std::to_string(w) + " " + std::to_string(h) + "\n-1.0\n";
  spill(path, header, payload);
}

DepthGrid read_sparse_csv(const std::filesystem::path& path, int height, int width) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path.string());
  DepthGrid grid(height, width, 1);
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::string sr, sc, sd;
    if (!std::getline(fields, sr, ',') || !std::getline(fields, sc, ',') ||
        !std::getline(fields, sd)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected row,col,depth_m");
    }
    int row = 0;
    int col = 0;
    double depth = 0.0;
    try {
      row = std::stoi(sr);
      col = std::stoi(sc);
      depth = std::stod(sd);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
    if (!grid.in_bounds(row, col)) {
      throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": point (" +
                           std::to_string(row) + ", " + std::to_string(col) +
                           ") is outside the " + std::to_string(height) + "x" +
                           std::to_string(width) + " grid");
    }
    if (!std::isfinite(depth)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": depth is not finite");
    }
    if (grid.valid(row, col)) {
      std::cerr << "warning: " << path.string() << ":" << line_no << ": duplicate point (" << row
                << ", " << col << "), keeping the last value\n";
    }
    grid.at(row, col) = depth;
    grid.set_valid(row, col, true);
  }
  return grid;
}

void write_sparse_csv(const std::filesystem::path& path, const DepthGrid& grid) {
  if (grid.channels() != 1) throw DimensionError("CSV output needs a single-channel grid");
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (grid.valid(r, c)) file << r << ',' << c << ',' << grid.at(r, c) << '\n';
    }
  }
  if (!file) throw IoError("failed writing " + path.string());
}

DepthGrid sample_sparse(const DepthGrid& gt, std::size_t n_points, std::uint64_t seed) {
  std::vector<PixelIndex> valid;
  for (PixelIndex i = 0; i < gt.pixel_count(); ++i) {
    if (gt.valid(i)) valid.push_back(i);
  }
  if (valid.size() < n_points) {
    throw ParameterError("cannot sample " + std::to_string(n_points) + " points from " +
                         std::to_string(valid.size()) + " valid pixels");
  }
  // Partial Fisher-Yates over the valid pixels.
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < n_points; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, valid.size() - 1);
    std::swap(valid[k], valid[pick(rng)]);
  }
  DepthGrid out(gt.height(), gt.width(), 1);
  for (std::size_t k = 0; k < n_points; ++k) {
    out.at(valid[k]) = gt.at(valid[k]);
    out.set_valid(valid[k], true);
  }
  return out;
}

DepthGrid read_depth(const std::filesystem::path& path, double pgm_scale, int height, int width) {
  const std::string ext = lower_extension(path);
  if (ext == ".pfm") {
    DepthGrid g = read_pfm(path);
    if (g.channels() != 1) throw DimensionError(path.string() + ": depth maps must have one channel");
    return g;
  }
  if (ext == ".pgm") return read_pgm(path, pgm_scale);
  if (ext == ".csv") {
    if (height <= 0 || width <= 0) {
      throw DimensionError(path.string() + ": CSV input needs the grid dimensions");
    }
    return read_sparse_csv(path, height, width);
  }
  throw ParseError(path.string() + ": unsupported extension (expected .pfm, .pgm or .csv)");
}

void write_depth(const std::filesystem::path& path, const DepthGrid& grid, double pgm_scale) {
  const std::string ext = lower_extension(path);
  if (ext == ".pfm") return write_pfm(path, grid);
  if (ext == ".pgm") return write_pgm(path, grid, pgm_scale);
  if (ext == ".csv") return write_sparse_csv(path, grid);
  throw ParseError(path.string() + ": unsupported extension (expected .pfm, .pgm or .csv)");
}

DepthGrid read_guide(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  DepthGrid g;
  if (ext == ".pfm") {
    g = read_pfm(path);
  } else if (ext == ".pgm") {
    g = read_pgm(path, kGuideScale);
  } else {
    throw ParseError(path.string() + ": guide must be .pfm or .pgm");
  }
  g.set_all_valid(true);
  return g;
}

}  // namespace gbpn
