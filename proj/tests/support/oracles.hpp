#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's kernels: direct 2-D loops, explicit reflection, closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fundoscope/raster.hpp"

namespace fundoscope::testing {

/// Uniform double in [0,1) from the top 53 bits; stable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline GrayPlane random_plane(std::size_t w, std::size_t h, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    GrayPlane p(w, h);
    for (double& v : p.samples()) v = lo + (hi - lo) * unit_uniform(rng);
    return p;
}

/// Half-sample reflection by repeated folding.
inline std::ptrdiff_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

/// Direct 2-D correlation with an odd-sized kernel (row-major, kh x kw).
inline GrayPlane correlate2d(const GrayPlane& p, const std::vector<double>& kernel, std::ptrdiff_t kw,
                             std::ptrdiff_t kh) {
    const auto w = static_cast<std::ptrdiff_t>(p.width());
    const auto h = static_cast<std::ptrdiff_t>(p.height());
    GrayPlane out(p.width(), p.height());
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::ptrdiff_t j = 0; j < kh; ++j) {
                for (std::ptrdiff_t i = 0; i < kw; ++i) {
                    const auto sx = reflect(x + i - kw / 2, w);
                    const auto sy = reflect(y + j - kh / 2, h);
                    acc += kernel[static_cast<std::size_t>(j * kw + i)] *
                           p(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
                }
            }
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
        }
    }
    return out;
}

/// Full 2-D truncated Gaussian, renormalized over the whole square support.
inline std::vector<double> gaussian_kernel_2d(double sigma, std::ptrdiff_t& size) {
    const auto r = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    size = 2 * r + 1;
    std::vector<double> k(static_cast<std::size_t>(size * size));
    double sum = 0.0;
    for (std::ptrdiff_t j = -r; j <= r; ++j) {
        for (std::ptrdiff_t i = -r; i <= r; ++i) {
            const double v = std::exp(-static_cast<double>(i * i + j * j) / (2.0 * sigma * sigma));
            k[static_cast<std::size_t>((j + r) * size + (i + r))] = v;
            sum += v;
        }
    }
    for (double& v : k) v /= sum;
    return k;
}

/// (-1)^k C(nu, k) computed as a product of k factors over k!.
inline double gl_binomial(double nu, int k) {
    double num = 1.0;
    double fact = 1.0;
    for (int i = 0; i < k; ++i) {
        num *= nu - i;
        fact *= i + 1;
    }
    return (k % 2 == 0 ? 1.0 : -1.0) * num / fact;
}

inline double max_abs_diff(const GrayPlane& a, const GrayPlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.samples()[i] - b.samples()[i]));
    return m;
}

inline GrayPlane impulse(std::size_t w, std::size_t h, std::size_t x, std::size_t y) {
    GrayPlane p(w, h);
    p(x, y) = 1.0;
    return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("fundoscope-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fundoscope::testing
