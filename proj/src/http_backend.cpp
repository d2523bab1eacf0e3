#include <httplib.h>

#include <cstdlib>
#include <semaphore>
#include <thread>

#include "woc/backends.hpp"
#include "woc/hashing.hpp"

namespace woc::backends {

namespace {

constexpr std::string_view kChatPath = "/v1/chat/completions";

// Splits "http://host:port/prefix" into origin and request path.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? std::string() : url.substr(path_start);
    while (!path.empty() && path.back() == '/') {
        path.pop_back();
    }
    if (path.size() < 17 || path.compare(path.size() - 17, 17, "/chat/completions") != 0) {
        if (path.size() >= 3 && path.compare(path.size() - 3, 3, "/v1") == 0) {
            path.resize(path.size() - 3);
        }
        path += kChatPath;
    }
    return {origin, path};
}

std::string extract_message(const std::string& body) {
    const auto doc = nlohmann::json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
        throw nlohmann::json::other_error::create(501, "message content is not a string", &content);
    }
    return content.get<std::string>();
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

struct HttpBackend::InFlight {
    explicit InFlight(int n) : slots(n) {}
    std::counting_semaphore<1 << 16> slots;
};

HttpBackend::HttpBackend(BackendConfig config, Sleeper sleeper)
    : config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      limiter_(config_.rate_limit),
      in_flight_(std::make_unique<InFlight>(config_.max_in_flight)) {
    if (!config_.endpoint_url || config_.endpoint_url->empty()) {
        throw Error(ErrorKind::ConfigInvalid, "http backend requires endpoint_url");
    }
    std::tie(origin_, path_) = split_endpoint(*config_.endpoint_url);
    if (!sleeper_) {
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

HttpBackend::~HttpBackend() = default;

nlohmann::ordered_json HttpBackend::request_body(const promptgen::PromptSpec& spec,
                                                 const GenerationParams& params) const {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    if (!spec.system_message.empty()) {
        messages.push_back({{"role", "system"}, {"content", spec.system_message}});
    }
    messages.push_back({{"role", "user"}, {"content", spec.user_message}});
    nlohmann::ordered_json body;
    body["model"] = config_.model_id;
    body["messages"] = std::move(messages);
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["max_tokens"] = params.max_tokens;
    body["seed"] = params.seed;
    return body;
}

Generation HttpBackend::generate(const promptgen::PromptSpec& spec, const GenerationParams& params) {
    const std::string body = request_body(spec, params).dump();
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    const BackoffSchedule backoff(config_.retry, digest_word(sha256(spec.prompt_hash), 0) ^ params.seed);

    ErrorKind last_kind = ErrorKind::BackendUnavailable;
    std::string last_message;
    const int max_attempts = config_.retry.max_attempts;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        limiter_.acquire();
        httplib::Result res;
        {
            in_flight_->slots.acquire();
            httplib::Client client(origin_);
            client.set_connection_timeout(config_.request_timeout);
            client.set_read_timeout(config_.request_timeout);
            client.set_write_timeout(config_.request_timeout);
            res = client.Post(path_, headers, body, "application/json");
            in_flight_->slots.release();
        }

        if (!res) {
            const auto err = res.error();
            last_kind = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                            ? ErrorKind::Timeout
                            : ErrorKind::BackendUnavailable;
            last_message = origin_ + path_ + ": " + httplib::to_string(err);
        } else if (res->status == 200) {
            try {
                return {extract_message(res->body), attempt};
            } catch (const nlohmann::json::exception& e) {
                throw BackendError(ErrorKind::MalformedReply, std::string("unparseable completion: ") + e.what(),
                                   attempt);
            }
        } else if (retryable_status(res->status)) {
            last_kind = res->status == 429 ? ErrorKind::RateLimited : ErrorKind::BackendUnavailable;
            last_message = "HTTP " + std::to_string(res->status);
        } else {
            throw BackendError(ErrorKind::BackendUnavailable,
                               "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), attempt);
        }
        if (attempt < max_attempts) {
            sleeper_(backoff.delay_after(attempt));
        }
    }
    throw BackendError(last_kind, last_message + " after " + std::to_string(max_attempts) + " attempts", max_attempts);
}

}  // namespace woc::backends
