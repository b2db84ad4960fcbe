#pragma once

// Grunwald-Letnikov fractional differentiation over eight compass directions,
// blended with the source so edges are boosted while the image is kept.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fundoscope/error.hpp"
#include "fundoscope/raster.hpp"

namespace fundoscope {

struct FracDiffParams {
    double nu = 0.7;     ///< fractional order, [0, 2)
    double alpha = 0.7;  ///< blend weight of the fractional response, [0, 1]
    int taps = 8;        ///< mask length, >= 2

    friend bool operator==(const FracDiffParams&, const FracDiffParams&) = default;
};

inline void check_range(const FracDiffParams& p) {
    if (!(p.nu >= 0.0 && p.nu < 2.0)) throw RangeError("nu", "nu must lie in [0, 2)");
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw RangeError("alpha", "alpha must lie in [0, 1]");
    if (p.taps < 2) throw RangeError("taps", "taps must be >= 2");
}

/// c0 = 1, ck = c(k-1) * (k - 1 - nu) / k.
inline std::vector<double> gl_coefficients(double nu, int taps) {
    check_range(FracDiffParams{nu, 0.0, taps});
    std::vector<double> c(static_cast<std::size_t>(taps));
    c[0] = 1.0;
    for (int k = 1; k < taps; ++k) {
        c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] * (k - 1 - nu) / k;
    }
    return c;
}

namespace detail {

// Summed in this fixed order.
inline constexpr std::array<std::array<int, 2>, 8> kCompass = {
    {{1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

inline void check_mask_fits(const GrayPlane& plane, int taps) {
    const auto k = static_cast<std::size_t>(taps);
    if (plane.width() < k || plane.height() < k) {
        throw ContractError("frac_derivative: " + std::to_string(plane.width()) + "x" +
                            std::to_string(plane.height()) + " plane is smaller than the " +
                            std::to_string(taps) + "-tap mask");
    }
}

}  // namespace detail

/// Mean of the eight directional GL responses; mirror boundary.
inline GrayPlane frac_derivative(const GrayPlane& plane, double nu, int taps) {
    const std::vector<double> c = gl_coefficients(nu, taps);
    const auto k_taps = static_cast<std::size_t>(taps);
    detail::check_mask_fits(plane, taps);
    const std::size_t w = plane.width();
    const std::size_t h = plane.height();
    GrayPlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double total = 0.0;
            for (const auto& d : detail::kCompass) {
                double acc = 0.0;
                for (std::size_t k = 0; k < k_taps; ++k) {
                    const auto step = static_cast<std::ptrdiff_t>(k);
                    const std::size_t sx = mirror_index(static_cast<std::ptrdiff_t>(x) + step * d[0], w);
                    const std::size_t sy = mirror_index(static_cast<std::ptrdiff_t>(y) + step * d[1], h);
                    acc += c[k] * plane(sx, sy);
                }
                total += acc;
            }
            out(x, y) = total / 8.0;
        }
    }
    return out;
}

/// clamp((1 - alpha) I + alpha D_nu I).
inline GrayPlane frac_enhance(const GrayPlane& plane, const FracDiffParams& params) {
    check_range(params);
    detail::check_mask_fits(plane, params.taps);
    if (params.alpha == 0.0 || params.nu == 0.0) {
        // D_0 is the identity, so both cases reduce to clamping the source.
        GrayPlane out = plane;
        for (double& v : out.samples()) v = clamp01(v);
        return out;
    }
    GrayPlane out = frac_derivative(plane, params.nu, params.taps);
    auto src = plane.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = clamp01((1.0 - params.alpha) * src[i] + params.alpha * dst[i]);
    }
    return out;
}

}  // namespace fundoscope
