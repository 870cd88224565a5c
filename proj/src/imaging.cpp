#include "bezitrace/imaging.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace bezitrace {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

RasterImage load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DecodeError("cannot open " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 ||
        png_sig_cmp(header, 0, 8) != 0)
        throw DecodeError(path + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("libpng initialization failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("failed to decode " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 width = png_get_image_width(png, info);
    png_uint_32 height = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // little-endian uint16 access
    png_read_update_info(png, info);

    color_type = png_get_color_type(png, info);
    bit_depth = png_get_bit_depth(png, info);
    int src_channels = png_get_channels(png, info);
    size_t rowbytes = png_get_rowbytes(png, info);

    data.resize(rowbytes * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = data.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    bool has_alpha = src_channels == 2 || src_channels == 4;
    int color_channels = src_channels >= 3 ? 3 : 1;
    double denom = bit_depth == 16 ? 65535.0 : 255.0;

    RasterImage out(static_cast<int>(width), static_cast<int>(height),
                    color_channels);
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* row = data.data() + y * rowbytes;
        for (png_uint_32 x = 0; x < width; ++x) {
            double v[4];
            for (int c = 0; c < src_channels; ++c) {
                if (bit_depth == 16) {
                    const uint16_t* row16 =
                        reinterpret_cast<const uint16_t*>(row);
                    v[c] = row16[x * src_channels + c] / denom;
                } else {
                    v[c] = row[x * src_channels + c] / denom;
                }
            }
            double a = has_alpha ? v[src_channels - 1] : 1.0;
            for (int c = 0; c < color_channels; ++c)
                out.at(static_cast<int>(x), static_cast<int>(y), c) =
                    a * v[c] + (1.0 - a);  // over white
        }
    }
    return out;
}

void save_png(const RasterImage& image, const std::string& path) {
    if (image.channels != 1 && image.channels != 3)
        throw std::invalid_argument("save_png expects 1 or 3 channels");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng initialization failed");
    }
    std::vector<png_byte> row(static_cast<size_t>(image.width) *
                              image.channels);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY
                                     : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < image.channels; ++c) {
                double v = std::clamp(image.at(x, y, c), 0.0, 1.0);
                row[static_cast<size_t>(x) * image.channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

double psnr(const RasterImage& a, const RasterImage& b) {
    if (a.width != b.width || a.height != b.height ||
        a.channels != b.channels)
        throw std::invalid_argument("psnr needs images of equal shape");
    double se = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = a.pixels[i] - b.pixels[i];
        se += d * d;
    }
    double mse = se / static_cast<double>(a.pixels.size());
    if (mse <= 0.0) return kPsnrCap;
    double value = 10.0 * std::log10(1.0 / mse);
    return std::min(value, kPsnrCap);
}

}  // namespace bezitrace
