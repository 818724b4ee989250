#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "umrahguard/model.hpp"
#include "umrahguard/textprep.hpp"

namespace umrahguard {

/// Label, confidence and attribution for one record. The CLI `predict`
/// command and the HTTP endpoint both go through verify_record.
struct Verdict {
    Prediction prediction;
    std::vector<FeatureWeight> top_features;
};

Verdict verify_record(const TrainedModel& model, const TextResources& resources, const AppRecord& record,
                      std::size_t top_k = 5);

nlohmann::ordered_json verdict_to_json(const Verdict& verdict);

/// Builds a record from a request body. Missing metadata fields take the
/// training means stored in the model; unknown fields are ignored.
/// Returns the diagnostics instead when the body is malformed.
struct RequestParse {
    std::optional<AppRecord> record;
    std::vector<std::string> errors;
};
RequestParse parse_verify_request(std::string_view body, const TrainedModel& model);

struct HttpReply {
    int status = 200;
    std::string body;
};

/// Transport-independent request handling over a model that is installed
/// once and never mutated afterwards.
class VerifyService {
public:
    explicit VerifyService(TextResources resources, std::size_t top_k = 5);

    void install(std::shared_ptr<const TrainedModel> model);
    bool ready() const;

    HttpReply handle_verify(std::string_view body) const;
    HttpReply handle_health() const;

private:
    std::shared_ptr<const TrainedModel> snapshot() const;

    TextResources resources_;
    std::size_t top_k_;
    mutable std::mutex mutex_;  // guards the pointer swap only
    std::shared_ptr<const TrainedModel> model_;
};

/// Blocking HTTP front end: POST /verify and GET /health.
class HttpServer {
public:
    HttpServer(const VerifyService& service, std::size_t threads = 32);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port or throws.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace umrahguard
