#ifndef BEZITRACE_IMAGING_HPP
#define BEZITRACE_IMAGING_HPP

#include <stdexcept>
#include <string>

#include "bezitrace/image.hpp"

namespace bezitrace {

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8/16-bit PNG, gray/RGB/palette, alpha composited over white. Values are
/// code values divided by 255 (or 65535); no gamma transform.
RasterImage load_png(const std::string& path);
/// Writes 8-bit gray or RGB. round(v * 255) per sample, so loading the
/// result reproduces 8-bit data exactly.
void save_png(const RasterImage& image, const std::string& path);

/// Peak signal-to-noise ratio in dB with MAX = 1.0; identical images (and
/// anything above the cap) report 99.0.
double psnr(const RasterImage& a, const RasterImage& b);

constexpr double kPsnrCap = 99.0;

}  // namespace bezitrace

#endif
