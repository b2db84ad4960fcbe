#pragma once

// Gaussian blur, Sobel edges, bump-map relief shading and cartoon darkening.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fundoscope/error.hpp"
#include "fundoscope/raster.hpp"

namespace fundoscope {

struct BumpMapParams {
    double azimuth = 135.0;   ///< degrees, [0, 360); counter-clockwise from +x, image up is +y
    double elevation = 45.0;  ///< degrees, (0, 90]
    double depth = 3.0;       ///< >= 0

    friend bool operator==(const BumpMapParams&, const BumpMapParams&) = default;
};

struct CartoonParams {
    double mask_radius = 7.0;  ///< sigma of the neighbourhood estimate, > 0
    double threshold = 0.2;    ///< relative darkness that starts darkening, (0, 1)
    double pct_black = 0.2;    ///< maximum darkening fraction, [0, 1]

    friend bool operator==(const CartoonParams&, const CartoonParams&) = default;
};

inline void check_range(const BumpMapParams& p) {
    if (!(p.azimuth >= 0.0 && p.azimuth < 360.0)) throw RangeError("azimuth", "azimuth must lie in [0, 360)");
    if (!(p.elevation > 0.0 && p.elevation <= 90.0)) {
        throw RangeError("elevation", "elevation must lie in (0, 90]");
    }
    if (!(p.depth >= 0.0) || !std::isfinite(p.depth)) throw RangeError("depth", "depth must be finite and >= 0");
}

inline void check_range(const CartoonParams& p) {
    if (!(p.mask_radius > 0.0) || !std::isfinite(p.mask_radius)) {
        throw RangeError("mask_radius", "mask_radius must be finite and > 0");
    }
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw RangeError("threshold", "threshold must lie in (0, 1)");
    if (!(p.pct_black >= 0.0 && p.pct_black <= 1.0)) throw RangeError("pct_black", "pct_black must lie in [0, 1]");
}

inline void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw RangeError("sigma", "sigma must be finite and > 0");
}

/// Sampled Gaussian truncated at ceil(3 sigma), normalized to sum 1. Index radius is the centre.
inline std::vector<double> gaussian_kernel(double sigma) {
    check_sigma(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
        const double v = std::exp(-static_cast<double>(t * t) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(t + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

inline GrayPlane gaussian_blur(const GrayPlane& plane, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
    const std::size_t w = plane.width();
    const std::size_t h = plane.height();
    GrayPlane tmp(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        auto src = plane.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                acc += k[static_cast<std::size_t>(t + radius)] *
                       src[mirror_index(static_cast<std::ptrdiff_t>(x) + t, w)];
            }
            tmp(x, y) = acc;
        }
    }
    GrayPlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                acc += k[static_cast<std::size_t>(t + radius)] *
                       tmp(x, mirror_index(static_cast<std::ptrdiff_t>(y) + t, h));
            }
            out(x, y) = acc;
        }
    }
    return out;
}

struct Gradients {
    GrayPlane gx;
    GrayPlane gy;
};

/// Raw 3x3 Sobel responses (correlation form, mirror boundary).
inline Gradients sobel_gradients(const GrayPlane& plane) {
    const std::size_t w = plane.width();
    const std::size_t h = plane.height();
    if (w < 3 || h < 3) {
        throw ContractError("sobel: plane must be at least 3x3, got " + std::to_string(w) + "x" +
                            std::to_string(h));
    }
    Gradients g{GrayPlane(w, h), GrayPlane(w, h)};
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t ym = mirror_index(static_cast<std::ptrdiff_t>(y) - 1, h);
        const std::size_t yp = mirror_index(static_cast<std::ptrdiff_t>(y) + 1, h);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xm = mirror_index(static_cast<std::ptrdiff_t>(x) - 1, w);
            const std::size_t xp = mirror_index(static_cast<std::ptrdiff_t>(x) + 1, w);
            g.gx(x, y) = (plane(xp, ym) + 2.0 * plane(xp, y) + plane(xp, yp)) -
                         (plane(xm, ym) + 2.0 * plane(xm, y) + plane(xm, yp));
            g.gy(x, y) = (plane(xm, yp) + 2.0 * plane(x, yp) + plane(xp, yp)) -
                         (plane(xm, ym) + 2.0 * plane(x, ym) + plane(xp, ym));
        }
    }
    return g;
}

/// Gradient magnitude scaled by 1 / (4 sqrt 2), the largest magnitude reachable from [0,1] input.
inline GrayPlane sobel(const GrayPlane& plane) {
    const Gradients g = sobel_gradients(plane);
    GrayPlane out(plane.width(), plane.height());
    const double scale = 1.0 / (4.0 * std::numbers::sqrt2);
    auto gx = g.gx.samples();
    auto gy = g.gy.samples();
    auto o = out.samples();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = clamp01(std::hypot(gx[i], gy[i]) * scale);
    return out;
}

/// Lambertian relief: the height field's central-difference normals lit from
/// (azimuth, elevation), normalized so a flat surface shades to exactly 1.
inline GrayPlane bump_map(const GrayPlane& plane, const GrayPlane& height, const BumpMapParams& params) {
    check_range(params);
    if (!plane.same_shape(height)) {
        throw ContractError("bump_map: height map is " + std::to_string(height.width()) + "x" +
                            std::to_string(height.height()) + ", plane is " +
                            std::to_string(plane.width()) + "x" + std::to_string(plane.height()));
    }
    const double az = params.azimuth * std::numbers::pi / 180.0;
    const double el = params.elevation * std::numbers::pi / 180.0;
    const double sin_el = std::sin(el);
    // Image rows grow downwards, so the light's screen-up component is negated.
    const double lx = std::cos(el) * std::cos(az);
    const double ly = -std::cos(el) * std::sin(az);
    const double lz = sin_el;
    const std::size_t w = plane.width();
    const std::size_t h = plane.height();
    GrayPlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        const std::size_t ym = mirror_index(static_cast<std::ptrdiff_t>(y) - 1, h);
        const std::size_t yp = mirror_index(static_cast<std::ptrdiff_t>(y) + 1, h);
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t xm = mirror_index(static_cast<std::ptrdiff_t>(x) - 1, w);
            const std::size_t xp = mirror_index(static_cast<std::ptrdiff_t>(x) + 1, w);
            const double nx = -params.depth * (height(xp, y) - height(xm, y)) / 2.0;
            const double ny = -params.depth * (height(x, yp) - height(x, ym)) / 2.0;
            double shade = 1.0;
            if (nx != 0.0 || ny != 0.0) {
                const double norm = std::sqrt(nx * nx + ny * ny + 1.0);
                shade = std::max(0.0, (nx * lx + ny * ly + lz) / norm) / sin_el;
            }
            out(x, y) = clamp01(plane(x, y) * shade);
        }
    }
    return out;
}

/// The image embossed by its own samples.
inline GrayPlane bump_map(const GrayPlane& plane, const BumpMapParams& params) {
    return bump_map(plane, plane, params);
}

inline constexpr double kCartoonEpsilon = 1e-4;

/// Darkens pixels whose relative darkness against a Gaussian neighbourhood
/// exceeds the threshold, ramping linearly up to pct_black.
inline GrayPlane cartoon(const GrayPlane& plane, const CartoonParams& params) {
    check_range(params);
    const GrayPlane blurred = gaussian_blur(plane, params.mask_radius);
    GrayPlane out = plane;
    auto b = blurred.samples();
    auto o = out.samples();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double d = (b[i] - o[i]) / std::max(b[i], kCartoonEpsilon);
        if (d > params.threshold) {
            const double ramp = std::min(1.0, (d - params.threshold) / (1.0 - params.threshold));
            o[i] *= 1.0 - params.pct_black * ramp;
        }
    }
    return out;
}

}  // namespace fundoscope
