#include "mpskit/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "mpskit/errors.hpp"

namespace mpskit {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail_read(const std::string& path, const char* what) {
    throw DataError("png read '" + path + "': " + what);
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Decodes to 8-bit rows, gray or RGB, alpha stripped, 16-bit scaled down.
std::vector<std::uint8_t> decode_png(const std::string& path, int& h, int& w, int& channels) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail_read(path, "cannot open file");

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        fail_read(path, "not a PNG file");

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) fail_read(path, "png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) fail_read(path, "png_create_info_struct failed");
    if (setjmp(png_jmpbuf(r.png))) fail_read(path, "decode error");

    png_init_io(r.png, fp.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const png_uint_32 width = png_get_image_width(r.png, r.info);
    const png_uint_32 height = png_get_image_height(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);

    if (bit_depth == 16) png_set_scale_16(r.png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    png_read_update_info(r.png, r.info);

    const std::size_t row_bytes = png_get_rowbytes(r.png, r.info);
    const int out_channels = static_cast<int>(png_get_channels(r.png, r.info));
    if (out_channels != 1 && out_channels != 3) fail_read(path, "unsupported channel layout");

    std::vector<std::uint8_t> data(row_bytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = data.data() + y * row_bytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    h = static_cast<int>(height);
    w = static_cast<int>(width);
    channels = out_channels;
    return data;
}

void encode_gray8(const std::string& path, int h, int w, int channels,
                  const std::vector<std::uint8_t>& data) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("png write '" + path + "': cannot open file");

    PngWriter wr;
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!wr.png) throw DataError("png write '" + path + "': init failed");
    wr.info = png_create_info_struct(wr.png);
    if (!wr.info) throw DataError("png write '" + path + "': init failed");
    if (setjmp(png_jmpbuf(wr.png))) throw DataError("png write '" + path + "': encode error");

    png_init_io(wr.png, fp.get());
    const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(wr.png, wr.info, w, h, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // pinned settings keep output bytes reproducible
    png_set_compression_level(wr.png, 6);
    png_set_filter(wr.png, 0, PNG_FILTER_NONE);
    png_write_info(wr.png, wr.info);

    std::vector<png_bytep> rows(h);
    const std::size_t row_bytes = static_cast<std::size_t>(w) * channels;
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * row_bytes);
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

}  // namespace

void write_mask_png(const PixelMask& mask, const std::string& path) {
    std::vector<std::uint8_t> data(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) data[i] = mask.bits[i] ? 255 : 0;
    encode_gray8(path, mask.height, mask.width, 1, data);
}

PixelMask read_mask_png(const std::string& path) {
    int h = 0, w = 0, channels = 0;
    const auto data = decode_png(path, h, w, channels);
    if (channels != 1) throw DataError("png read '" + path + "': mask must be single-channel");
    PixelMask mask(h, w);
    for (std::size_t i = 0; i < mask.size(); ++i) mask.bits[i] = data[i] >= 128 ? 1 : 0;
    return mask;
}

ImageTensor read_image_png(const std::string& path) {
    int h = 0, w = 0, channels = 0;
    const auto data = decode_png(path, h, w, channels);
    ImageTensor img(h, w, channels);
    for (std::size_t i = 0; i < img.size(); ++i)
        img.values[i] = static_cast<float>(data[i]) / 255.f;
    return img;
}

void write_image_png(const ImageTensor& image, const std::string& path) {
    image.validate();
    if (image.channels != 1 && image.channels != 3)
        throw DataError("png write '" + path + "': only 1- or 3-channel images");
    std::vector<std::uint8_t> data(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        const float v = std::clamp(image.values[i], 0.f, 1.f);
        data[i] = static_cast<std::uint8_t>(std::lround(v * 255.f));
    }
    encode_gray8(path, image.height, image.width, image.channels, data);
}

}  // namespace mpskit
