#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

#include "crackle/model_io.hpp"

namespace httplib {
class Server;
}

namespace crackle {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string model_path;
    std::size_t max_body_bytes = 32ull << 20;  // 32 MiB upload cap
};

// Upload-and-classify endpoint. The model is loaded once and shared
// immutably; every request classifies its own buffer, so responses are a
// pure function of (model file, request body).
//
//   POST /classify  body: WAV bytes -> {model_version, window_len, results}
//   GET  /health            -> {status, model_version, uptime_seconds}
class ClassifyService {
public:
    explicit ClassifyService(TrainedModel model);

    void attach(httplib::Server& server) const;

    const TrainedModel& model() const { return model_; }
    std::uint64_t classify_requests() const { return classify_requests_.load(); }

private:
    TrainedModel model_;
    std::chrono::steady_clock::time_point started_;
    mutable std::atomic<std::uint64_t> classify_requests_{0};
};

// Loads the model, binds host:port and blocks serving requests.
int run_service(const ServiceConfig& config);

}  // namespace crackle
