#pragma once

// Undecimated (a trous) multiscale decomposition with the B3-spline kernel,
// and gain-weighted recomposition over named resolution levels.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fundoscope/error.hpp"
#include "fundoscope/raster.hpp"

namespace fundoscope {

inline constexpr int kMaxDecompositionLevels = 8;
inline constexpr int kNamedLevels = 5;
inline constexpr int kDefaultWaveletLevels = 5;

/// Detail planes w1..wJ (finest first) and the residual cJ.
struct WaveletStack {
    std::vector<GrayPlane> details;
    GrayPlane residual;

    int levels() const noexcept { return static_cast<int>(details.size()); }
};

/// Per-level multiplicative gains; 1 leaves a level unchanged.
struct WaveletGains {
    double finest = 1.0;
    double fine = 1.0;
    double medium = 1.0;
    double coarse = 1.0;
    double coarsest = 1.0;
    double remain = 1.0;

    /// Gain of detail level j (1-based), in finest-to-coarsest order.
    double detail(int j) const {
        switch (j) {
            case 1: return finest;
            case 2: return fine;
            case 3: return medium;
            case 4: return coarse;
            case 5: return coarsest;
            default: throw ContractError("no named gain for wavelet level " + std::to_string(j));
        }
    }

    WaveletGains scaled(double k) const {
        return {finest * k, fine * k, medium * k, coarse * k, coarsest * k, remain * k};
    }

    friend bool operator==(const WaveletGains&, const WaveletGains&) = default;
};

inline void check_range(const WaveletGains& g) {
    const std::array<std::pair<const char*, double>, 6> named = {{{"finest", g.finest},
                                                                  {"fine", g.fine},
                                                                  {"medium", g.medium},
                                                                  {"coarse", g.coarse},
                                                                  {"coarsest", g.coarsest},
                                                                  {"remain", g.remain}}};
    for (const auto& [name, v] : named) {
        if (!std::isfinite(v) || v < 0.0) {
            throw RangeError(name, std::string("wavelet gain ") + name + " must be finite and >= 0");
        }
    }
}

namespace detail {

inline constexpr std::array<double, 5> kB3Spline = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

// One smoothing step: separable B3-spline with 2^(level-1) - 1 zeros between taps.
inline GrayPlane atrous_smooth(const GrayPlane& in, int level) {
    const std::ptrdiff_t step = std::ptrdiff_t{1} << (level - 1);
    const std::size_t w = in.width();
    const std::size_t h = in.height();
    GrayPlane tmp(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        auto src = in.row(y);
        auto dst = tmp.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -2; t <= 2; ++t) {
                acc += kB3Spline[t + 2] * src[mirror_index(static_cast<std::ptrdiff_t>(x) + t * step, w)];
            }
            dst[x] = acc;
        }
    }
    GrayPlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -2; t <= 2; ++t) {
                acc += kB3Spline[t + 2] * tmp(x, mirror_index(static_cast<std::ptrdiff_t>(y) + t * step, h));
            }
            out(x, y) = acc;
        }
    }
    return out;
}

}  // namespace detail

inline WaveletStack decompose(const GrayPlane& plane, int levels) {
    if (levels < 1 || levels > kMaxDecompositionLevels) {
        throw RangeError("levels", "wavelet levels must lie in [1, " +
                                       std::to_string(kMaxDecompositionLevels) + "]");
    }
    const std::size_t min_side = std::size_t{1} << levels;
    if (plane.width() < min_side || plane.height() < min_side) {
        throw ContractError("decompose: " + std::to_string(plane.width()) + "x" +
                            std::to_string(plane.height()) + " plane is too small for " +
                            std::to_string(levels) + " levels (needs " + std::to_string(min_side) +
                            " per side)");
    }
    WaveletStack stack;
    stack.details.reserve(static_cast<std::size_t>(levels));
    GrayPlane current = plane;
    for (int j = 1; j <= levels; ++j) {
        GrayPlane smooth = detail::atrous_smooth(current, j);
        GrayPlane detail_plane = current;
        auto d = detail_plane.samples();
        auto s = smooth.samples();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
        stack.details.push_back(std::move(detail_plane));
        current = std::move(smooth);
    }
    stack.residual = std::move(current);
    return stack;
}

/// Gain-weighted sum of the stack with no clamping.
inline GrayPlane recompose_unclamped(const WaveletStack& stack, const WaveletGains& gains) {
    if (stack.levels() < 1 || stack.levels() > kNamedLevels) {
        throw ContractError("recompose: stack has " + std::to_string(stack.levels()) +
                            " levels, named gains cover 1.." + std::to_string(kNamedLevels));
    }
    check_range(gains);
    GrayPlane out = stack.residual;
    for (double& v : out.samples()) v *= gains.remain;
    for (int j = 1; j <= stack.levels(); ++j) {
        const double g = gains.detail(j);
        auto src = stack.details[static_cast<std::size_t>(j - 1)].samples();
        auto dst = out.samples();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g * src[i];
    }
    return out;
}

inline GrayPlane recompose(const WaveletStack& stack, const WaveletGains& gains) {
    GrayPlane out = recompose_unclamped(stack, gains);
    for (double& v : out.samples()) v = clamp01(v);
    return out;
}

inline GrayPlane wavelet_enhance(const GrayPlane& plane, const WaveletGains& gains,
                                 int levels = kDefaultWaveletLevels) {
    return recompose(decompose(plane, levels), gains);
}

}  // namespace fundoscope
