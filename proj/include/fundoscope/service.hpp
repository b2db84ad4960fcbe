#pragma once

// HTTP front end for interactive tuning: upload an image once, then request
// enhanced PNGs for as many pipeline variants as needed.
//
//   POST /api/images   raw image bytes            -> {"id": "..."}
//   POST /api/enhance  {"id": ..., "pipeline": ...} -> image/png
//   GET  /api/presets                             -> {"presets": [{"name", "pipeline"}]}
//   GET  /                                        -> tuner UI bundle

#ifndef CPPHTTPLIB_FORM_URL_ENCODED_PAYLOAD_MAX_LENGTH
#define CPPHTTPLIB_FORM_URL_ENCODED_PAYLOAD_MAX_LENGTH (64u * 1024u * 1024u)
#endif

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

#include "fundoscope/error.hpp"
#include "fundoscope/image_io.hpp"
#include "fundoscope/pipeline.hpp"

namespace fundoscope {

inline constexpr std::size_t kSessionCapacity = 32;
inline constexpr std::size_t kMaxUploadBytes = 64u * 1024u * 1024u;

/// Thread-safe LRU store of decoded uploads. Images are shared read-only, so an
/// eviction never invalidates a request that already holds one.
class SessionStore {
public:
    explicit SessionStore(std::size_t capacity = kSessionCapacity)
        : capacity_(capacity), rng_(std::random_device{}()) {}

    std::string put(RgbImage image) {
        auto shared = std::make_shared<const RgbImage>(std::move(image));
        std::lock_guard lock(mutex_);
        std::string id = next_id();
        order_.emplace_front(id, std::move(shared));
        index_[id] = order_.begin();
        while (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
        return id;
    }

    /// Marks the entry most recently used. Null if unknown or evicted.
    std::shared_ptr<const RgbImage> get(const std::string& id) {
        std::lock_guard lock(mutex_);
        auto it = index_.find(id);
        if (it == index_.end()) return nullptr;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return order_.size();
    }

private:
    // Counter prefix keeps ids unique; the random suffix makes them unguessable.
    std::string next_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::string id;
        std::uint64_t parts[2] = {++counter_, rng_()};
        for (std::uint64_t part : parts) {
            for (int shift = 60; shift >= 0; shift -= 4) id += hex[(part >> shift) & 0xf];
        }
        return id;
    }

    using Slot = std::pair<std::string, std::shared_ptr<const RgbImage>>;

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Slot> order_;
    std::unordered_map<std::string, std::list<Slot>::iterator> index_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 rng_;
};

struct HttpResult {
    int status = 200;
    std::string content_type;
    std::string body;
};

inline HttpResult json_error(int status, std::string_view error, std::string_view detail) {
    nlohmann::json body = {{"error", error}, {"detail", detail}};
    return {status, "application/json", body.dump()};
}

namespace detail {

inline constexpr std::string_view kFallbackIndex = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>fundoscope</title></head>
<body>
<h1>fundoscope enhance service</h1>
<p>No tuner UI bundle is installed. Point <code>--ui-dir</code> or <code>FUNDOSCOPE_UI_DIR</code> at a built bundle.</p>
<ul>
<li><code>POST /api/images</code> raw PPM/PGM/PNG bytes &rarr; <code>{"id": ...}</code></li>
<li><code>POST /api/enhance</code> <code>{"id": ..., "pipeline": ...}</code> &rarr; PNG</li>
<li><code>GET /api/presets</code></li>
</ul>
</body></html>
)";

}  // namespace detail

class EnhanceService {
public:
    explicit EnhanceService(PresetTable presets = builtin_presets(), std::filesystem::path ui_dir = {})
        : presets_(std::move(presets)), ui_dir_(std::move(ui_dir)) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& entry : presets_.entries()) {
            list.push_back({{"name", entry.name}, {"pipeline", serialize(entry.config)}});
        }
        presets_body_ = nlohmann::json{{"presets", list}}.dump();
    }

    HttpResult upload(std::string_view body) {
        if (body.size() > kMaxUploadBytes) {
            return json_error(413, "payload_too_large", "uploads are limited to 64 MiB");
        }
        try {
            const auto* bytes = reinterpret_cast<const std::uint8_t*>(body.data());
            std::string id = store_.put(decode_image({bytes, body.size()}));
            return {200, "application/json", nlohmann::json{{"id", id}}.dump()};
        } catch (const FormatError& e) {
            return json_error(400, "bad_image", e.what());
        } catch (const ContractError& e) {
            return json_error(400, "bad_image", e.what());
        }
    }

    HttpResult enhance(std::string_view body) {
        nlohmann::json request = nlohmann::json::parse(body, nullptr, false);
        if (request.is_discarded() || !request.is_object()) {
            return json_error(400, "bad_request", "body must be a JSON object");
        }
        if (!request.contains("id") || !request["id"].is_string()) {
            return json_error(400, "bad_request", "missing string field 'id'");
        }
        if (!request.contains("pipeline") || !request["pipeline"].is_string()) {
            return json_error(400, "bad_request", "missing string field 'pipeline'");
        }
        const std::string id = request["id"].get<std::string>();
        auto image = store_.get(id);
        if (!image) return json_error(404, "unknown_image", "no uploaded image with id '" + id + "'");

        PipelineConfig config;
        try {
            config = parse_pipeline_config(request["pipeline"].get<std::string>());
        } catch (const ParseError& e) {
            return json_error(400, "bad_pipeline", e.what());
        } catch (const ContractError& e) {
            return json_error(400, "bad_pipeline", e.what());
        }
        try {
            const Bytes png = encode_png(run_pipeline(*image, config));
            return {200, "image/png", std::string(png.begin(), png.end())};
        } catch (const ContractError& e) {
            return json_error(422, "pipeline_failed", e.what());
        }
    }

    HttpResult presets() const { return {200, "application/json", presets_body_}; }

    HttpResult index() const {
        if (!ui_dir_.empty() && std::filesystem::is_regular_file(ui_dir_ / "index.html")) {
            const Bytes page = read_file(ui_dir_ / "index.html");
            return {200, "text/html", std::string(page.begin(), page.end())};
        }
        return {200, "text/html", std::string(detail::kFallbackIndex)};
    }

    const PresetTable& preset_table() const noexcept { return presets_; }
    SessionStore& store() noexcept { return store_; }

    /// Registers all routes on `server`.
    void mount(httplib::Server& server) {
        const auto reply = [](httplib::Response& res, const HttpResult& r) {
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        server.set_payload_max_length(kMaxUploadBytes);
        server.Post("/api/images", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, upload(req.body));
        });
        server.Post("/api/enhance", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, enhance(req.body));
        });
        server.Get("/api/presets", [this, reply](const httplib::Request&, httplib::Response& res) {
            reply(res, presets());
        });
        server.Get("/", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, index()); });
        if (!ui_dir_.empty() && std::filesystem::is_directory(ui_dir_)) {
            server.set_mount_point("/", ui_dir_.string());
        }
        // Status-only failures raised by httplib itself (413, 404 on unknown routes).
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
            const HttpResult r = json_error(res.status, httplib::status_message(res.status), "");
            res.set_content(r.body, r.content_type);
            return httplib::Server::HandlerResponse::Handled;
        });
    }

private:
    PresetTable presets_;
    std::filesystem::path ui_dir_;
    std::string presets_body_;
    SessionStore store_;
};

}  // namespace fundoscope
