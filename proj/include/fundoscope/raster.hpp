#pragma once

// Core raster types and the simple point/mask operations built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fundoscope/error.hpp"

namespace fundoscope {

/// Single-channel raster of real samples, nominally in [0,1], row-major.
class GrayPlane {
public:
    GrayPlane() = default;

    GrayPlane(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), samples_(checked_area(width, height), fill) {}

    GrayPlane(std::size_t width, std::size_t height, std::vector<double> samples)
        : width_(width), height_(height), samples_(std::move(samples)) {
        if (samples_.size() != checked_area(width, height)) {
            throw ContractError("GrayPlane: sample count " + std::to_string(samples_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
        }
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    double& operator()(std::size_t x, std::size_t y) noexcept { return samples_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const noexcept { return samples_[y * width_ + x]; }

    std::span<double> samples() noexcept { return samples_; }
    std::span<const double> samples() const noexcept { return samples_; }

    std::span<double> row(std::size_t y) noexcept { return {samples_.data() + y * width_, width_}; }
    std::span<const double> row(std::size_t y) const noexcept {
        return {samples_.data() + y * width_, width_};
    }

    bool same_shape(const GrayPlane& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool all_finite() const noexcept {
        return std::all_of(samples_.begin(), samples_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const GrayPlane&, const GrayPlane&) = default;

private:
    static std::size_t checked_area(std::size_t width, std::size_t height) {
        if (width == 0 || height == 0) {
            throw ContractError("GrayPlane: dimensions must be positive");
        }
        return width * height;
    }

    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> samples_;
};

/// Three aligned planes.
struct RgbImage {
    GrayPlane r;
    GrayPlane g;
    GrayPlane b;

    RgbImage() = default;

    RgbImage(GrayPlane red, GrayPlane green, GrayPlane blue)
        : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {
        if (!r.same_shape(g) || !r.same_shape(b)) {
            throw ContractError("RgbImage: channel dimensions differ");
        }
    }

    /// Replicates one plane into all three channels.
    static RgbImage from_gray(const GrayPlane& plane) { return {plane, plane, plane}; }

    std::size_t width() const noexcept { return r.width(); }
    std::size_t height() const noexcept { return r.height(); }

    std::array<GrayPlane*, 3> channels() noexcept { return {&r, &g, &b}; }
    std::array<const GrayPlane*, 3> channels() const noexcept { return {&r, &g, &b}; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

using Rgb = std::array<double, 3>;

/// Circular field of view; true marks fundus pixels.
class FovMask {
public:
    FovMask() = default;
    FovMask(std::size_t width, std::size_t height, bool fill = false)
        : width_(width), height_(height), bits_(width * height, fill) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }

    bool operator()(std::size_t x, std::size_t y) const { return bits_[y * width_ + x]; }
    void set(std::size_t x, std::size_t y, bool v) { bits_[y * width_ + x] = v; }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
    }

    friend bool operator==(const FovMask&, const FovMask&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<bool> bits_;
};

struct BrightnessContrast {
    double brightness = 0.0;  ///< additive shift, [-1, 1]
    double contrast = 0.0;    ///< slope control, [-1, 1]

    friend bool operator==(const BrightnessContrast&, const BrightnessContrast&) = default;
};

inline constexpr double kDefaultFovThreshold = 0.08;

inline double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

/// Half-sample symmetric reflection: -1 -> 0, n -> n-1. Valid for any offset.
inline std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) noexcept {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    const auto sn = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(m < sn ? m : period - 1 - m);
}

/// Rec. 601 luma.
inline GrayPlane to_gray(const RgbImage& image) {
    GrayPlane out(image.width(), image.height());
    auto r = image.r.samples();
    auto g = image.g.samples();
    auto b = image.b.samples();
    auto o = out.samples();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    }
    return out;
}

inline void check_range(const BrightnessContrast& bc) {
    if (!(bc.brightness >= -1.0 && bc.brightness <= 1.0)) {
        throw RangeError("brightness", "brightness must lie in [-1, 1]");
    }
    if (!(bc.contrast >= -1.0 && bc.contrast <= 1.0)) {
        throw RangeError("contrast", "contrast must lie in [-1, 1]");
    }
}

/// Pivot-at-0.5 tangent law: slope tan(pi (c + 1) / 4), then additive brightness.
inline GrayPlane adjust_brightness_contrast(const GrayPlane& plane, const BrightnessContrast& bc) {
    check_range(bc);
    GrayPlane out = plane;
    if (bc.contrast == 0.0) {
        // Slope is exactly 1 here; tan(pi/4) rounds just below it.
        for (double& v : out.samples()) v = clamp01(v + bc.brightness);
        return out;
    }
    const double slope = std::tan(std::numbers::pi * (bc.contrast + 1.0) / 4.0);
    for (double& v : out.samples()) {
        v = clamp01((v - 0.5) * slope + 0.5 + bc.brightness);
    }
    return out;
}

/// Raw thresholded indicator before morphological cleaning.
inline FovMask fov_indicator(const GrayPlane& plane, double threshold) {
    FovMask mask(plane.width(), plane.height());
    for (std::size_t y = 0; y < plane.height(); ++y) {
        for (std::size_t x = 0; x < plane.width(); ++x) {
            mask.set(x, y, plane(x, y) > threshold);
        }
    }
    return mask;
}

namespace detail {

// 3x3 box morphology over in-bounds neighbours only.
inline FovMask morph3(const FovMask& in, bool erode) {
    const std::size_t w = in.width();
    const std::size_t h = in.height();
    FovMask out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            bool acc = erode;
            for (std::size_t yy = (y == 0 ? 0 : y - 1); yy <= std::min(h - 1, y + 1); ++yy) {
                for (std::size_t xx = (x == 0 ? 0 : x - 1); xx <= std::min(w - 1, x + 1); ++xx) {
                    acc = erode ? (acc && in(xx, yy)) : (acc || in(xx, yy));
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

}  // namespace detail

/// Thresholds luma, then opens with a 3x3 box to drop isolated speckle.
inline FovMask detect_fov_mask(const GrayPlane& plane, double threshold = kDefaultFovThreshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw RangeError("threshold", "FOV threshold must lie in (0, 1)");
    }
    return detail::morph3(detail::morph3(fov_indicator(plane, threshold), true), false);
}

inline void check_tone(const Rgb& tone) {
    static constexpr const char* names[] = {"r", "g", "b"};
    for (std::size_t c = 0; c < 3; ++c) {
        if (!(tone[c] >= 0.0 && tone[c] <= 1.0)) {
            throw RangeError(names[c], std::string("tone component ") + names[c] + " must lie in [0, 1]");
        }
    }
}

/// Pixels outside the mask become `tone`; pixels inside are copied untouched.
inline RgbImage replace_background(const RgbImage& image, const FovMask& mask, const Rgb& tone) {
    if (mask.width() != image.width() || mask.height() != image.height()) {
        throw ContractError("replace_background: mask is " + std::to_string(mask.width()) + "x" +
                            std::to_string(mask.height()) + ", image is " +
                            std::to_string(image.width()) + "x" + std::to_string(image.height()));
    }
    check_tone(tone);
    RgbImage out = image;
    auto ch = out.channels();
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            if (!mask(x, y)) {
                for (std::size_t c = 0; c < 3; ++c) (*ch[c])(x, y) = tone[c];
            }
        }
    }
    return out;
}

}  // namespace fundoscope
