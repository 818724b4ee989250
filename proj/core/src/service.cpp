#include "umrahguard/service.hpp"

#include <chrono>
#include <cmath>

// The default backlog of 5 drops connections when many clients reconnect at once.
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#include <httplib.h>

#include "umrahguard/errors.hpp"

namespace umrahguard {

using ojson = nlohmann::ordered_json;

Verdict verify_record(const TrainedModel& model, const TextResources& resources, const AppRecord& record,
                      std::size_t top_k) {
    const auto tokens = preprocess_text(record.description, resources);
    const auto x = model.featurize(record, tokens);
    return {predict(model.classifier, x), explain(model, x, top_k)};
}

ojson verdict_to_json(const Verdict& verdict) {
    ojson features = ojson::array();
    for (const auto& f : verdict.top_features) features.push_back({{"name", f.name}, {"weight", f.weight}});
    return {{"label", label_name(verdict.prediction.label)},
            {"confidence", verdict.prediction.confidence},
            {"top_features", std::move(features)}};
}

RequestParse parse_verify_request(std::string_view body, const TrainedModel& model) {
    RequestParse out;
    ojson j;
    try {
        j = ojson::parse(body);
    } catch (const ojson::parse_error& e) {
        out.errors.push_back(std::string("body: not valid JSON (") + e.what() + ")");
        return out;
    }
    if (!j.is_object()) {
        out.errors.push_back("body: expected a JSON object");
        return out;
    }

    AppRecord r;
    r.app_id = "request";
    if (const auto it = j.find("name"); it != j.end()) {
        if (it->is_string()) r.name = it->get<std::string>();
        else out.errors.push_back("name: expected a string");
    }
    if (const auto it = j.find("description"); it == j.end()) {
        out.errors.push_back("description: required field is missing");
    } else if (!it->is_string()) {
        out.errors.push_back("description: expected a string");
    } else {
        r.description = it->get<std::string>();
    }
    if (const auto it = j.find("permissions"); it == j.end()) {
        out.errors.push_back("permissions: required field is missing");
    } else if (!it->is_array()) {
        out.errors.push_back("permissions: expected an array of strings");
    } else {
        for (std::size_t k = 0; k < it->size(); ++k) {
            const auto& p = (*it)[k];
            if (!p.is_string() || !is_valid_permission(p.get<std::string>())) {
                out.errors.push_back("permissions[" + std::to_string(k) + "]: expected an identifier like READ_SMS");
            } else {
                r.permissions.insert(p.get<std::string>());
            }
        }
    }

    const auto& mean = model.pipeline.meta_stats.mean;
    auto number = [&](const char* key, double fallback, double lo, double hi) -> double {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) return fallback;
        if (!it->is_number() || !std::isfinite(it->get<double>()) || it->get<double>() < lo || it->get<double>() > hi) {
            out.errors.push_back(std::string(key) + ": expected a number in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
            return fallback;
        }
        return it->get<double>();
    };
    constexpr double kHuge = 1e15;
    r.download_count = static_cast<std::uint64_t>(std::llround(number("download_count", mean[0], 0.0, kHuge)));
    r.rating = number("rating", mean[1], 0.0, 5.0);
    r.size_mb = number("size_mb", mean[2], 0.0, kHuge);
    r.days_since_update = static_cast<std::uint64_t>(std::llround(number("days_since_update", mean[3], 0.0, kHuge)));

    if (out.errors.empty()) out.record = std::move(r);
    return out;
}

// --- service ---------------------------------------------------------------

VerifyService::VerifyService(TextResources resources, std::size_t top_k)
    : resources_(std::move(resources)), top_k_(top_k) {}

void VerifyService::install(std::shared_ptr<const TrainedModel> model) {
    std::lock_guard lock(mutex_);
    model_ = std::move(model);
}

std::shared_ptr<const TrainedModel> VerifyService::snapshot() const {
    std::lock_guard lock(mutex_);
    return model_;
}

bool VerifyService::ready() const { return snapshot() != nullptr; }

namespace {

HttpReply error_reply(int status, const std::string& message, const std::vector<std::string>& details = {}) {
    ojson j{{"error", message}};
    if (!details.empty()) j["details"] = details;
    return {status, j.dump()};
}

}  // namespace

HttpReply VerifyService::handle_verify(std::string_view body) const {
    const auto start = std::chrono::steady_clock::now();
    const auto model = snapshot();
    if (!model) return error_reply(503, "model not loaded");

    auto parsed = parse_verify_request(body, *model);
    if (!parsed.record) return error_reply(400, "malformed request", parsed.errors);

    Verdict verdict;
    try {
        verdict = verify_record(*model, resources_, *parsed.record, top_k_);
    } catch (const Error& e) {
        return error_reply(400, e.what());
    }
    auto j = verdict_to_json(verdict);
    j["model_version"] = model->version;
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    j["latency_ms"] = elapsed.count();
    return {200, j.dump()};
}

HttpReply VerifyService::handle_health() const {
    const auto model = snapshot();
    if (!model) return error_reply(503, "model not loaded");
    return {200, ojson{{"status", "ok"}, {"model_version", model->version}}.dump()};
}

// --- HTTP ------------------------------------------------------------------

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(const VerifyService& service, std::size_t threads) : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;
    srv.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    // Small request/response pairs: without this, delayed ACKs add ~40 ms.
    srv.set_tcp_nodelay(true);
    srv.set_keep_alive_max_count(1000);
    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    };
    srv.Post("/verify", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.handle_verify(req.body));
    });
    srv.Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.handle_health());
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    auto& srv = impl_->server;
    if (port == 0) {
        const int bound = srv.bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!srv.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace umrahguard
