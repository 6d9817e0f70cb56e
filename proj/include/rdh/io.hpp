#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "rdh/image.hpp"

namespace rdh {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads PNG (8/16-bit gray or RGB; alpha dropped, palettes expanded) or
/// binary PGM/PPM (P5/P6, maxval up to 65535). Values are scaled by
/// 1/(2^bits - 1).
ImageF load_image(const std::filesystem::path& path);

/// Writes by extension: .png, .pgm (1 channel) or .ppm (3 channels).
/// Values are clipped to [0,1] and rounded half-up to `bit_depth` (8 or 16).
void save_image(const std::filesystem::path& path, const ImageF& img, int bit_depth = 8);

/// Quantizes exactly as save_image would, without touching the disk.
ImageF quantize(const ImageF& img, int bit_depth);

}  // namespace rdh
