#pragma once

// Reading and writing 8-bit PPM (P6), PGM (P5) and PNG rasters.

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "fundoscope/error.hpp"
#include "fundoscope/raster.hpp"

namespace fundoscope {

using Bytes = std::vector<std::uint8_t>;

/// Clamp to [0,1], scale to [0,255], round half up.
inline std::uint8_t quantize(double v) noexcept {
    return static_cast<std::uint8_t>(std::floor(clamp01(v) * 255.0 + 0.5));
}

namespace detail {

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t next_uint(const char* field) {
        skip_space_and_comments();
        if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
            throw FormatError(std::string("PNM header: missing or invalid ") + field);
        }
        std::size_t value = 0;
        while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
            value = value * 10 + (data_[pos_++] - '0');
            if (value > (1u << 24)) throw FormatError(std::string("PNM header: ") + field + " too large");
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
            throw FormatError("PNM header: expected whitespace after maxval");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (std::isspace(data_[pos_])) {
                ++pos_;
            } else if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 2;
};

inline RgbImage decode_pnm(std::span<const std::uint8_t> data) {
    const bool color = data[1] == '6';
    PnmHeaderReader header(data);
    const std::size_t width = header.next_uint("width");
    const std::size_t height = header.next_uint("height");
    const std::size_t maxval = header.next_uint("maxval");
    if (width == 0 || height == 0) throw FormatError("PNM header: width and height must be positive");
    if (maxval != 255) {
        throw FormatError("PNM header: unsupported maxval " + std::to_string(maxval) + " (only 255)");
    }
    const std::size_t offset = header.raster_offset();
    const std::size_t channels = color ? 3 : 1;
    const std::size_t needed = width * height * channels;
    if (data.size() - offset < needed) {
        throw FormatError("PNM payload truncated: expected " + std::to_string(needed) + " bytes, got " +
                          std::to_string(data.size() - offset));
    }
    GrayPlane r(width, height), g(width, height), b(width, height);
    const std::uint8_t* px = data.data() + offset;
    for (std::size_t i = 0; i < width * height; ++i) {
        if (color) {
            r.samples()[i] = px[3 * i] / 255.0;
            g.samples()[i] = px[3 * i + 1] / 255.0;
            b.samples()[i] = px[3 * i + 2] / 255.0;
        } else {
            r.samples()[i] = g.samples()[i] = b.samples()[i] = px[i] / 255.0;
        }
    }
    return {std::move(r), std::move(g), std::move(b)};
}

inline RgbImage decode_png(std::span<const std::uint8_t> data) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("PNG: " + msg);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw FormatError("PNG: unsupported bit depth 16 (only 8-bit channels)");
    }
    image.format = PNG_FORMAT_RGB;
    const std::size_t width = image.width;
    const std::size_t height = image.height;
    Bytes buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("PNG: " + msg);
    }
    GrayPlane r(width, height), g(width, height), b(width, height);
    for (std::size_t i = 0; i < width * height; ++i) {
        r.samples()[i] = buffer[3 * i] / 255.0;
        g.samples()[i] = buffer[3 * i + 1] / 255.0;
        b.samples()[i] = buffer[3 * i + 2] / 255.0;
    }
    return {std::move(r), std::move(g), std::move(b)};
}

inline Bytes interleave(const RgbImage& image) {
    const std::size_t n = image.width() * image.height();
    Bytes out(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[3 * i] = quantize(image.r.samples()[i]);
        out[3 * i + 1] = quantize(image.g.samples()[i]);
        out[3 * i + 2] = quantize(image.b.samples()[i]);
    }
    return out;
}

}  // namespace detail

/// Decodes by magic number: "P6", "P5" or the PNG signature.
inline RgbImage decode_image(std::span<const std::uint8_t> data) {
    static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= 8 && std::memcmp(data.data(), png_sig, 8) == 0) return detail::decode_png(data);
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '6' || data[1] == '5')) {
        return detail::decode_pnm(data);
    }
    std::string magic;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, data.size()); ++i) {
        magic += std::isprint(data[i]) ? static_cast<char>(data[i]) : '?';
    }
    throw FormatError("unsupported magic '" + magic + "' (expected P6, P5 or PNG)");
}

inline Bytes encode_ppm(const RgbImage& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    Bytes out(header.begin(), header.end());
    Bytes pixels = detail::interleave(image);
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

/// 8-bit RGB PNG. Output bytes depend only on the quantized pixels.
inline Bytes encode_png(const RgbImage& image) {
    const Bytes pixels = detail::interleave(image);
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width());
    png.height = static_cast<png_uint_32>(image.height());
    png.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw FormatError(std::string("PNG encode: ") + png.message);
    }
    Bytes out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw FormatError(std::string("PNG encode: ") + png.message);
    }
    out.resize(size);
    return out;
}

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return data;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline RgbImage load_image(const std::filesystem::path& path) {
    const Bytes data = read_file(path);
    try {
        return decode_image(data);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

/// Format follows the extension: .ppm writes P6, .png writes PNG.
inline void save_image(const RgbImage& image, const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".ppm") {
        write_file(path, encode_ppm(image));
    } else if (ext == ".png") {
        write_file(path, encode_png(image));
    } else {
        throw FormatError("cannot infer output format from extension '" + ext + "' (use .ppm or .png)");
    }
}

}  // namespace fundoscope
