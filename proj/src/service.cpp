#include "crackle/service.hpp"

#include <cstdio>

#include <httplib.h>
#include <json.hpp>

#include "crackle/errors.hpp"
#include "crackle/pipeline.hpp"

namespace crackle {

ClassifyService::ClassifyService(TrainedModel model)
    : model_(std::move(model)), started_(std::chrono::steady_clock::now()) {}

void ClassifyService::attach(httplib::Server& server) const {
    server.Post("/classify", [this](const httplib::Request& req,
                                    httplib::Response& res) {
        classify_requests_.fetch_add(1, std::memory_order_relaxed);
        nlohmann::json body;
        try {
            const auto* bytes = reinterpret_cast<const std::uint8_t*>(req.body.data());
            const AudioRecording rec =
                decode_wav({bytes, req.body.size()}, "upload");
            // One request classifies one buffer; request-level concurrency
            // comes from the server's worker pool.
            const auto results = classify_recording(model_, rec, Exec::serial);

            body["model_version"] = model_.meta.version_tag;
            body["window_len"] = model_.meta.window.window_len;
            auto& arr = body["results"];
            arr = nlohmann::json::array();
            for (const auto& r : results) {
                arr.push_back({{"start_time", r.start_time},
                               {"end_time", r.end_time},
                               {"label", label_name(r.label)},
                               {"confidence", r.confidence}});
            }
            res.status = 200;
        } catch (const DecodeError& e) {
            body = {{"error", e.what()}};
            res.status = 400;
        } catch (const EmptyInputError& e) {
            body = {{"error", e.what()}};
            res.status = 400;
        } catch (const std::exception& e) {
            // Detail stays in the log; the client gets an opaque id.
            std::uint64_t h = 14695981039346656037ULL;
            for (const char* p = e.what(); *p; ++p) {
                h = (h ^ static_cast<std::uint8_t>(*p)) * 1099511628211ULL;
            }
            char id[24];
            std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(h));
            std::fprintf(stderr, "internal error %s: %s\n", id, e.what());
            body = {{"error_id", id}};
            res.status = 500;
        }
        res.set_content(body.dump(), "application/json");
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        const auto uptime = std::chrono::duration_cast<std::chrono::seconds>(
                                std::chrono::steady_clock::now() - started_)
                                .count();
        nlohmann::json body = {{"status", "ok"},
                               {"model_version", model_.meta.version_tag},
                               {"uptime_seconds", uptime}};
        res.status = 200;
        res.set_content(body.dump(), "application/json");
    });
}

int run_service(const ServiceConfig& config) {
    if (config.model_path.empty()) {
        throw ConfigError("serve needs a model path (--model or CRACKLE_MODEL)");
    }
    ClassifyService service(load_model_file(config.model_path));

    httplib::Server server;
    server.set_payload_max_length(config.max_body_bytes);
    service.attach(server);

    std::printf("serving model %s on %s:%d\n", config.model_path.c_str(),
                config.host.c_str(), config.port);
    std::fflush(stdout);
    if (!server.listen(config.host, config.port)) {
        throw IoError("cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    return 0;
}

}  // namespace crackle
