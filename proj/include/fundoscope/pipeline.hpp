#pragma once

// Ordered filter pipelines, their line-oriented text form, and the named preset table.
//
// Text form, one step per line:
//
//     <kind> <key>=<value> <key>=<value> ...
//
// Blank lines and '#' comments are ignored. Keys left out take the step's
// default; serialize() always writes every key in a fixed order.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "fundoscope/atrous.hpp"
#include "fundoscope/error.hpp"
#include "fundoscope/fractional.hpp"
#include "fundoscope/raster.hpp"
#include "fundoscope/relief.hpp"

namespace fundoscope {

struct GrayParams {
    friend bool operator==(const GrayParams&, const GrayParams&) = default;
};

struct SobelParams {
    friend bool operator==(const SobelParams&, const SobelParams&) = default;
};

struct BlurParams {
    double sigma = 1.0;
    friend bool operator==(const BlurParams&, const BlurParams&) = default;
};

struct WaveletParams {
    WaveletGains gains;
    int levels = kDefaultWaveletLevels;
    friend bool operator==(const WaveletParams&, const WaveletParams&) = default;
};

/// Tone has no default: the colour of the replacement background is always explicit.
struct BackgroundParams {
    Rgb tone{0.0, 0.0, 0.0};
    double threshold = kDefaultFovThreshold;
    friend bool operator==(const BackgroundParams&, const BackgroundParams&) = default;
};

using StepParams = std::variant<GrayParams, BrightnessContrast, BackgroundParams, WaveletParams,
                                FracDiffParams, SobelParams, BumpMapParams, CartoonParams, BlurParams>;

struct FilterStep {
    StepParams params;
    friend bool operator==(const FilterStep&, const FilterStep&) = default;
};

struct PipelineConfig {
    std::vector<FilterStep> steps;
    std::string name;

    /// Step equality only; the label is not part of a pipeline's meaning.
    bool same_steps(const PipelineConfig& other) const { return steps == other.steps; }
};

namespace detail {

template <typename T> struct StepTraits;

template <> struct StepTraits<GrayParams> {
    static constexpr std::string_view kind = "gray";
    template <typename P, typename F> static void fields(P&, F&&) {}
};

template <> struct StepTraits<BrightnessContrast> {
    static constexpr std::string_view kind = "brightness_contrast";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("brightness", p.brightness);
        f("contrast", p.contrast);
    }
};

template <> struct StepTraits<BackgroundParams> {
    static constexpr std::string_view kind = "replace_background";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("r", p.tone[0]);
        f("g", p.tone[1]);
        f("b", p.tone[2]);
        f("threshold", p.threshold);
    }
};

template <> struct StepTraits<WaveletParams> {
    static constexpr std::string_view kind = "wavelet";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("finest", p.gains.finest);
        f("fine", p.gains.fine);
        f("medium", p.gains.medium);
        f("coarse", p.gains.coarse);
        f("coarsest", p.gains.coarsest);
        f("remain", p.gains.remain);
        f("levels", p.levels);
    }
};

template <> struct StepTraits<FracDiffParams> {
    static constexpr std::string_view kind = "frac_enhance";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("nu", p.nu);
        f("alpha", p.alpha);
        f("taps", p.taps);
    }
};

template <> struct StepTraits<SobelParams> {
    static constexpr std::string_view kind = "sobel";
    template <typename P, typename F> static void fields(P&, F&&) {}
};

template <> struct StepTraits<BumpMapParams> {
    static constexpr std::string_view kind = "bump_map";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("azimuth", p.azimuth);
        f("elevation", p.elevation);
        f("depth", p.depth);
    }
};

template <> struct StepTraits<CartoonParams> {
    static constexpr std::string_view kind = "cartoon";
    template <typename P, typename F> static void fields(P& p, F&& f) {
        f("mask_radius", p.mask_radius);
        f("threshold", p.threshold);
        f("pct_black", p.pct_black);
    }
};

template <> struct StepTraits<BlurParams> {
    static constexpr std::string_view kind = "gaussian_blur";
    template <typename P, typename F> static void fields(P& p, F&& f) { f("sigma", p.sigma); }
};

template <typename T> inline std::vector<std::string_view> required_keys() {
    if constexpr (std::is_same_v<T, BackgroundParams>) return {"r", "g", "b"};
    return {};
}

inline void check_step(const GrayParams&) {}
inline void check_step(const SobelParams&) {}
inline void check_step(const BrightnessContrast& p) { check_range(p); }
inline void check_step(const FracDiffParams& p) { check_range(p); }
inline void check_step(const BumpMapParams& p) { check_range(p); }
inline void check_step(const CartoonParams& p) { check_range(p); }
inline void check_step(const BlurParams& p) { check_sigma(p.sigma); }
inline void check_step(const BackgroundParams& p) {
    check_tone(p.tone);
    if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw RangeError("threshold", "threshold must lie in (0, 1)");
}
inline void check_step(const WaveletParams& p) {
    check_range(p.gains);
    if (p.levels < 1 || p.levels > kNamedLevels) {
        throw RangeError("levels", "levels must lie in [1, " + std::to_string(kNamedLevels) + "]");
    }
}

inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_number(int v) { return std::to_string(v); }

template <typename T> bool parse_number(std::string_view text, T& out) {
    if (text.empty()) return false;
    // from_chars rejects a leading '+', which users reasonably write.
    if (text.front() == '+') text.remove_prefix(1);
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

// Index of each kind in the StepParams variant, looked up by name.
template <std::size_t I = 0>
inline std::optional<StepParams> default_step_for(std::string_view kind) {
    if constexpr (I < std::variant_size_v<StepParams>) {
        using T = std::variant_alternative_t<I, StepParams>;
        if (StepTraits<T>::kind == kind) return StepParams{std::in_place_index<I>, T{}};
        return default_step_for<I + 1>(kind);
    } else {
        return std::nullopt;
    }
}

template <std::size_t I = 0> inline void append_kinds(std::string& out) {
    if constexpr (I < std::variant_size_v<StepParams>) {
        if (!out.empty()) out += ", ";
        out += StepTraits<std::variant_alternative_t<I, StepParams>>::kind;
        append_kinds<I + 1>(out);
    }
}

}  // namespace detail

inline std::string_view step_kind(const FilterStep& step) {
    return std::visit([](const auto& p) { return detail::StepTraits<std::decay_t<decltype(p)>>::kind; },
                      step.params);
}

inline std::string known_step_kinds() {
    std::string out;
    detail::append_kinds(out);
    return out;
}

/// Checks every step's ranges and the single-gray rule. Errors name the 1-based step index.
inline void validate(const PipelineConfig& config) {
    bool seen_gray = false;
    for (std::size_t i = 0; i < config.steps.size(); ++i) {
        const FilterStep& step = config.steps[i];
        const std::string where = "step " + std::to_string(i + 1) + " (" + std::string(step_kind(step)) + "): ";
        if (std::holds_alternative<GrayParams>(step.params)) {
            if (seen_gray) throw ContractError(where + "a pipeline may contain at most one gray step");
            seen_gray = true;
        }
        try {
            std::visit([](const auto& p) { detail::check_step(p); }, step.params);
        } catch (const RangeError& e) {
            throw RangeError(e.param(), where + e.what());
        }
    }
}

inline std::string serialize_step(const FilterStep& step) {
    return std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            std::string line(detail::StepTraits<T>::kind);
            detail::StepTraits<T>::fields(p, [&](std::string_view key, const auto& value) {
                line += ' ';
                line += key;
                line += '=';
                line += detail::format_number(value);
            });
            return line;
        },
        step.params);
}

/// Canonical text: one line per step, every key, shortest round-trip numbers.
inline std::string serialize(const PipelineConfig& config) {
    std::string out;
    for (const FilterStep& step : config.steps) {
        out += serialize_step(step);
        out += '\n';
    }
    return out;
}

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
        tokens.push_back({line.substr(start, i - start), start + 1});
    }
    return tokens;
}

inline FilterStep parse_step(const std::vector<Token>& tokens, std::size_t line_no) {
    const Token& head = tokens.front();
    std::optional<StepParams> params = default_step_for(head.text);
    if (!params) {
        throw ParseError(line_no, head.column,
                         "unknown step kind '" + std::string(head.text) + "' (known: " + known_step_kinds() + ")");
    }
    std::visit(
        [&](auto& p) {
            using T = std::decay_t<decltype(p)>;
            std::vector<std::string_view> seen;
            for (std::size_t t = 1; t < tokens.size(); ++t) {
                const Token& tok = tokens[t];
                const std::size_t eq = tok.text.find('=');
                if (eq == std::string_view::npos || eq == 0) {
                    throw ParseError(line_no, tok.column, "expected key=value, got '" + std::string(tok.text) + "'");
                }
                const std::string_view key = tok.text.substr(0, eq);
                const std::string_view value = tok.text.substr(eq + 1);
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
                    throw ParseError(line_no, tok.column, "duplicate key '" + std::string(key) + "'");
                }
                bool matched = false;
                StepTraits<T>::fields(p, [&](std::string_view name, auto& field) {
                    if (name != key) return;
                    matched = true;
                    if (!parse_number(value, field)) {
                        throw ParseError(line_no, tok.column + eq + 1,
                                         "invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
                    }
                });
                if (!matched) {
                    throw ParseError(line_no, tok.column,
                                     "unknown key '" + std::string(key) + "' for step '" + std::string(head.text) + "'");
                }
                seen.push_back(key);
            }
            for (std::string_view key : required_keys<T>()) {
                if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
                    throw ParseError(line_no, head.column,
                                     "step '" + std::string(head.text) + "' requires key '" + std::string(key) + "'");
                }
            }
            try {
                check_step(p);
            } catch (const RangeError& e) {
                throw RangeError(e.param(), "line " + std::to_string(line_no) + ": " + e.what());
            }
        },
        *params);
    return FilterStep{std::move(*params)};
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(std::string_view text, std::string name = {}) {
    PipelineConfig config;
    config.name = std::move(name);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        const auto tokens = detail::tokenize(text.substr(pos, end - pos));
        if (!tokens.empty()) config.steps.push_back(detail::parse_step(tokens, line_no));
        pos = end + 1;
    }
    validate(config);
    return config;
}

/// Sets `key` on every step of kind `kind`; "wavelet.remain=1" style overrides.
inline void apply_override(PipelineConfig& config, std::string_view assignment) {
    const std::size_t dot = assignment.find('.');
    const std::size_t eq = assignment.find('=');
    if (dot == std::string_view::npos || eq == std::string_view::npos || dot > eq || dot == 0 || eq == dot + 1) {
        throw ContractError("override '" + std::string(assignment) + "' is not of the form STEP.KEY=VALUE");
    }
    const std::string_view kind = assignment.substr(0, dot);
    const std::string_view key = assignment.substr(dot + 1, eq - dot - 1);
    const std::string_view value = assignment.substr(eq + 1);
    std::size_t hits = 0;
    for (FilterStep& step : config.steps) {
        if (step_kind(step) != kind) continue;
        std::visit(
            [&](auto& p) {
                using T = std::decay_t<decltype(p)>;
                detail::StepTraits<T>::fields(p, [&](std::string_view name, auto& field) {
                    if (name != key) return;
                    if (!detail::parse_number(value, field)) {
                        throw ContractError("override '" + std::string(assignment) + "': invalid value");
                    }
                    ++hits;
                });
            },
            step.params);
    }
    if (hits == 0) {
        throw LookupError("override '" + std::string(assignment) + "' matches no step key in the pipeline");
    }
    validate(config);
}

namespace detail {

// Either three colour planes or, after a gray step, one.
struct WorkingImage {
    std::vector<GrayPlane> planes;

    RgbImage to_rgb() const {
        return planes.size() == 1 ? RgbImage::from_gray(planes[0]) : RgbImage{planes[0], planes[1], planes[2]};
    }

    template <typename F> void each(F&& f) {
        for (GrayPlane& p : planes) p = f(p);
    }
};

inline void apply_step(WorkingImage& img, const FilterStep& step) {
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GrayParams>) {
                if (img.planes.size() == 3) img.planes = {to_gray(img.to_rgb())};
            } else if constexpr (std::is_same_v<T, BrightnessContrast>) {
                img.each([&](const GrayPlane& g) { return adjust_brightness_contrast(g, p); });
            } else if constexpr (std::is_same_v<T, BackgroundParams>) {
                if (img.planes.size() == 1) {
                    const FovMask mask = detect_fov_mask(img.planes[0], p.threshold);
                    const double luma = 0.299 * p.tone[0] + 0.587 * p.tone[1] + 0.114 * p.tone[2];
                    img.planes[0] = replace_background(RgbImage::from_gray(img.planes[0]), mask, {luma, luma, luma}).r;
                } else {
                    const RgbImage rgb = img.to_rgb();
                    RgbImage out = replace_background(rgb, detect_fov_mask(to_gray(rgb), p.threshold), p.tone);
                    img.planes = {std::move(out.r), std::move(out.g), std::move(out.b)};
                }
            } else if constexpr (std::is_same_v<T, WaveletParams>) {
                img.each([&](const GrayPlane& g) { return wavelet_enhance(g, p.gains, p.levels); });
            } else if constexpr (std::is_same_v<T, FracDiffParams>) {
                img.each([&](const GrayPlane& g) { return frac_enhance(g, p); });
            } else if constexpr (std::is_same_v<T, SobelParams>) {
                img.each([](const GrayPlane& g) { return sobel(g); });
            } else if constexpr (std::is_same_v<T, BumpMapParams>) {
                img.each([&](const GrayPlane& g) { return bump_map(g, p); });
            } else if constexpr (std::is_same_v<T, CartoonParams>) {
                img.each([&](const GrayPlane& g) { return cartoon(g, p); });
            } else if constexpr (std::is_same_v<T, BlurParams>) {
                img.each([&](const GrayPlane& g) { return gaussian_blur(g, p.sigma); });
            }
        },
        step.params);
}

}  // namespace detail

/// Applies steps in order, channel-wise on colour input; after a gray step the
/// single plane is carried on and replicated to r = g = b at the end.
inline RgbImage run_pipeline(const RgbImage& image, const PipelineConfig& config) {
    validate(config);
    detail::WorkingImage work{{image.r, image.g, image.b}};
    for (std::size_t i = 0; i < config.steps.size(); ++i) {
        try {
            detail::apply_step(work, config.steps[i]);
        } catch (const ContractError& e) {
            throw ContractError("step " + std::to_string(i + 1) + " (" + std::string(step_kind(config.steps[i])) +
                                "): " + e.what());
        }
    }
    return work.to_rgb();
}

/// Ordered name -> pipeline table.
class PresetTable {
public:
    struct Entry {
        std::string name;
        PipelineConfig config;
    };

    void add(std::string name, PipelineConfig config) {
        config.name = name;
        for (Entry& e : entries_) {
            if (e.name == name) {
                e.config = std::move(config);
                return;
            }
        }
        entries_.push_back({std::move(name), std::move(config)});
    }

    bool contains(std::string_view name) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
    }

    const PipelineConfig& at(std::string_view name) const {
        for (const Entry& e : entries_) {
            if (e.name == name) return e.config;
        }
        throw LookupError("unknown preset '" + std::string(name) + "'; available: " + names_joined());
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const Entry& e : entries_) out.push_back(e.name);
        return out;
    }

    std::string names_joined() const {
        std::string out;
        for (const Entry& e : entries_) {
            if (!out.empty()) out += ", ";
            out += e.name;
        }
        return out;
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

/// Brightness/contrast used where a recipe only says the result was "adjusted".
inline constexpr BrightnessContrast kPresetAdjust{0.1, 0.3};

/// Gains of the recommended colour recipe: three finest levels at 25, residual at 2.
inline constexpr WaveletGains kStrongDetailGains{25.0, 25.0, 25.0, 1.0, 1.0, 2.0};

inline PresetTable builtin_presets() {
    const auto steps = [](std::initializer_list<StepParams> list) {
        PipelineConfig c;
        for (const StepParams& p : list) c.steps.push_back(FilterStep{p});
        return c;
    };
    const WaveletParams fine_only{{1.0, 10.1, 1.0, 1.0, 1.0, 1.0}, 5};
    const WaveletParams three_levels{{10.1, 10.1, 10.1, 1.0, 1.0, 1.0}, 5};
    const WaveletParams strong{kStrongDetailGains, 5};
    const FracDiffParams frac_a{0.7, 0.7, 8};
    const FracDiffParams frac_c{0.9, 0.5, 8};

    PresetTable t;
    t.add("fig1b", steps({GrayParams{}}));
    t.add("fig1c", steps({kPresetAdjust}));
    t.add("fig1d", steps({GrayParams{}, kPresetAdjust}));
    t.add("fig1e", steps({BumpMapParams{}}));
    t.add("fig1f", steps({SobelParams{}}));
    t.add("fig2a", steps({frac_a}));
    t.add("fig2b", steps({frac_a, kPresetAdjust}));
    t.add("fig2c", steps({frac_c}));
    t.add("fig2d", steps({frac_c, kPresetAdjust}));
    t.add("fig2e", steps({fine_only}));
    t.add("fig2f", steps({three_levels}));
    t.add("fig4e", steps({frac_a, kPresetAdjust}));
    t.add("fig5", steps({CartoonParams{}, kPresetAdjust}));
    t.add("fig6", steps({strong, BumpMapParams{}}));
    t.add("fig7", steps({GrayParams{}, CartoonParams{}}));
    t.add("fig10", steps({strong, BumpMapParams{}}));
    return t;
}

inline PipelineConfig load_pipeline_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pipeline file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_pipeline_config(text.str(), path.stem().string());
}

/// Adds every *.pipeline file in `dir` under its stem. Built-in names are not replaced.
inline std::vector<std::string> add_preset_dir(PresetTable& table, const std::filesystem::path& dir) {
    std::vector<std::string> skipped;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pipeline") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        const std::string name = file.stem().string();
        if (table.contains(name)) {
            skipped.push_back(name);
            continue;
        }
        table.add(name, load_pipeline_file(file));
    }
    return skipped;
}

}  // namespace fundoscope
