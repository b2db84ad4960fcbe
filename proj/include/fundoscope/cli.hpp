#pragma once

// Batch command-line front end.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fundoscope/error.hpp"
#include "fundoscope/image_io.hpp"
#include "fundoscope/pipeline.hpp"
#include "fundoscope/service.hpp"

namespace fundoscope {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFileFailed = 1;
inline constexpr int kExitUsage = 2;

struct CliInvocation {
    std::vector<std::string> inputs;
    std::string output = ".";
    std::string preset;
    std::string config_file;
    std::vector<std::string> overrides;
    bool dry_run = false;
    bool list_presets = false;
    unsigned jobs = 0;
    std::optional<int> serve_port;
    std::string host = "127.0.0.1";
    std::string ui_dir;
};

namespace detail {

inline std::string lower_ext(const fs::path& p) {
    std::string ext = p.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

inline bool is_image_ext(const fs::path& p) {
    const std::string ext = lower_ext(p);
    return ext == ".ppm" || ext == ".pgm" || ext == ".png";
}

// Directories expand to their image files in name order; files pass through.
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> out;
    for (const std::string& in : inputs) {
        const fs::path p(in);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(p)) {
                if (entry.is_regular_file() && is_image_ext(entry.path())) files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

inline PresetTable preset_table_from_env(std::ostream& err) {
    PresetTable table = builtin_presets();
    if (const char* dir = std::getenv("FUNDOSCOPE_PRESET_DIR"); dir != nullptr && *dir != '\0') {
        try {
            for (const std::string& name : add_preset_dir(table, dir)) {
                err << "warning: user preset '" << name << "' shadows a built-in preset and was ignored\n";
            }
        } catch (const std::exception& e) {
            err << "warning: FUNDOSCOPE_PRESET_DIR: " << e.what() << "\n";
        }
    }
    return table;
}

inline int serve_forever(EnhanceService& service, const std::string& host, int port, std::ostream& out,
                         std::ostream& err) {
    httplib::Server server;
    service.mount(server);
    if (!server.bind_to_port(host, port)) {
        err << "error: cannot bind " << host << ":" << port << "\n";
        return kExitFileFailed;
    }
    out << "serving on http://" << host << ":" << port << "/" << std::endl;
    return server.listen_after_bind() ? kExitOk : kExitFileFailed;
}

}  // namespace detail

/// Parses `args` (without the program name) and runs. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliInvocation inv;
    CLI::App app{"Fundus image enhancement: wavelet gains, fractional edges, relief and cartoon filters",
                 "fundoscope"};
    app.add_option("inputs", inv.inputs, "Input images (PPM, PGM, PNG) or directories of them");
    app.add_option("-o,--out", inv.output, "Output directory, or output file for a single input");
    auto* preset_opt = app.add_option("--preset", inv.preset, "Named preset (see --list-presets)");
    auto* config_opt = app.add_option("--config", inv.config_file, "Pipeline file");
    preset_opt->excludes(config_opt);
    app.add_option("--set", inv.overrides, "Override a step parameter, STEP.KEY=VALUE (repeatable)");
    app.add_flag("--dry-run", inv.dry_run, "Print the effective pipeline and write nothing");
    app.add_option("--jobs", inv.jobs, "Files processed concurrently (default: processor count)")
        ->check(CLI::PositiveNumber);
    std::string serve_arg;
    auto* serve_opt = app.add_option("--serve", serve_arg, "Start the enhance service on PORT (default 8080) and block")
                          ->expected(0, 1);
    app.add_option("--host", inv.host, "Bind address for --serve");
    app.add_option("--ui-dir", inv.ui_dir, "Tuner UI bundle served at / (default: $FUNDOSCOPE_UI_DIR)");
    app.add_flag("--list-presets", inv.list_presets, "List preset names and exit");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }
    if (serve_opt->count() > 0) {
        int port = 8080;
        if (!serve_arg.empty() && (!detail::parse_number(serve_arg, port) || port < 0 || port > 65535)) {
            err << "error: --serve: invalid port '" << serve_arg << "'\n";
            return kExitUsage;
        }
        inv.serve_port = port;
    }

    const PresetTable presets = detail::preset_table_from_env(err);

    if (inv.list_presets) {
        for (const std::string& name : presets.names()) out << name << "\n";
        return kExitOk;
    }

    if (inv.serve_port) {
        std::string ui_dir = inv.ui_dir;
        if (ui_dir.empty()) {
            if (const char* env = std::getenv("FUNDOSCOPE_UI_DIR")) ui_dir = env;
        }
        EnhanceService service(presets, ui_dir);
        return detail::serve_forever(service, inv.host, *inv.serve_port, out, err);
    }

    if (inv.preset.empty() == inv.config_file.empty()) {
        err << "error: exactly one of --preset or --config is required\n\n" << app.help();
        return kExitUsage;
    }

    PipelineConfig config;
    std::string label;
    try {
        if (!inv.preset.empty()) {
            config = presets.at(inv.preset);
            label = inv.preset;
        } else {
            config = load_pipeline_file(inv.config_file);
            label = fs::path(inv.config_file).stem().string();
        }
        for (const std::string& o : inv.overrides) apply_override(config, o);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (inv.dry_run) {
        out << serialize(config);
        return kExitOk;
    }

    if (inv.inputs.empty()) {
        err << "error: no input images given\n\n" << app.help();
        return kExitUsage;
    }
    const std::vector<fs::path> files = detail::expand_inputs(inv.inputs);
    if (files.empty()) {
        err << "error: no image files found in the given inputs\n";
        return kExitFileFailed;
    }

    const fs::path out_path(inv.output);
    const bool single_file_out = files.size() == 1 && detail::is_image_ext(out_path) && !fs::is_directory(out_path);
    std::vector<fs::path> targets;
    for (const fs::path& f : files) {
        targets.push_back(single_file_out ? out_path : out_path / (f.stem().string() + "." + label + ".png"));
    }
    std::error_code ec;
    const fs::path out_dir = single_file_out ? out_path.parent_path() : out_path;
    if (!out_dir.empty()) fs::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create output directory " << out_dir << ": " << ec.message() << "\n";
        return kExitFileFailed;
    }

    std::vector<std::string> failures(files.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            try {
                save_image(run_pipeline(load_image(files[i]), config), targets[i]);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    unsigned jobs = inv.jobs != 0 ? inv.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, files.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
    }

    int code = kExitOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!failures[i].empty()) {
            err << "error: " << files[i].string() << ": " << failures[i] << "\n";
            code = kExitFileFailed;
        }
    }
    return code;
}

}  // namespace fundoscope
