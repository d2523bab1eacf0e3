#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "woc/error.hpp"
#include "woc/persona.hpp"
#include "woc/promptgen.hpp"

namespace woc::backends {

struct GenerationParams {
    double temperature = 0.7;
    double top_p = 0.95;
    int max_tokens = 128;
    std::uint64_t seed = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_backoff{250};
    std::chrono::milliseconds max_backoff{8000};
};

enum class DistributionKind { Constant, Normal, LogNormal, Uniform };

// Constant(a) | Normal(mean a, sd b) | LogNormal(log-mean a, log-sd b) | Uniform[a, b].
struct Distribution {
    DistributionKind kind = DistributionKind::Constant;
    double a = 1426.0;
    double b = 0.0;

    double quantile(double u) const;
};

struct MixtureComponent {
    double weight = 1.0;
    Distribution distribution;
};

// Synthetic response population used for desk-scale simulation and tests.
struct CrowdModel {
    std::vector<MixtureComponent> components{{1.0, {}}};
    double unit_mix = 0.0;      // probability of answering in kilometres
    double refusal_rate = 0.0;  // probability of a non-numeric reply
    std::map<std::string, double> persona_bias;  // "Attribute=Value" -> miles

    static CrowdModel constant(double value);
    static CrowdModel normal(double mean, double sd);
    void validate() const;
};

enum class BackendKind { Mock, Http };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::optional<std::string> endpoint_url;
    std::string model_id = "mock-crowd";
    int max_in_flight = 4;
    std::chrono::milliseconds request_timeout{60000};
    RetryPolicy retry;
    double rate_limit = 0.0;  // requests per second, 0 = unlimited
    std::string api_key_env = "WOC_API_KEY";
    CrowdModel crowd;

    void validate() const;
};

nlohmann::ordered_json to_json(const GenerationParams& params);
GenerationParams generation_params_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const CrowdModel& crowd);
CrowdModel crowd_model_from_json(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const BackendConfig& config);
BackendConfig backend_config_from_json(const nlohmann::json& doc);

// Backend failure after the retry policy gave up; carries the attempt count.
class BackendError : public Error {
public:
    BackendError(ErrorKind kind, const std::string& message, int attempts)
        : Error(kind, message), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

struct Generation {
    std::string text;
    int attempts = 1;
};

class Backend {
public:
    virtual ~Backend() = default;
    // Must be safe to call concurrently.
    virtual Generation generate(const promptgen::PromptSpec& spec, const GenerationParams& params) = 0;
    virtual std::string name() const = 0;
    virtual std::string model_id() const = 0;
};

// Pure function of (prompt_hash, params.seed, crowd, persona values).
std::string mock_generate(const persona::AttributeSpace& space, const promptgen::PromptSpec& spec,
                          const GenerationParams& params, const CrowdModel& crowd);

class MockBackend final : public Backend {
public:
    MockBackend(persona::AttributeSpace space, CrowdModel crowd, std::string model_id = "mock-crowd");

    Generation generate(const promptgen::PromptSpec& spec, const GenerationParams& params) override;
    std::string name() const override { return "mock"; }
    std::string model_id() const override { return model_id_; }
    std::size_t calls() const { return calls_.load(); }

private:
    persona::AttributeSpace space_;
    CrowdModel crowd_;
    std::string model_id_;
    std::atomic<std::size_t> calls_{0};
};

// Exponential backoff with multiplicative jitter in [1, 1.5): delays are
// non-decreasing in the attempt number and capped at max_backoff.
class BackoffSchedule {
public:
    BackoffSchedule(RetryPolicy policy, std::uint64_t jitter_seed);
    std::chrono::milliseconds delay_after(int failed_attempt) const;

private:
    RetryPolicy policy_;
    std::uint64_t jitter_seed_;
};

// Spaces request starts at least 1/rate apart across all callers.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_{};
    std::chrono::steady_clock::time_point next_slot_{};
};

// OpenAI-compatible chat completions client.
class HttpBackend final : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpBackend(BackendConfig config, Sleeper sleeper = {});
    ~HttpBackend() override;

    Generation generate(const promptgen::PromptSpec& spec, const GenerationParams& params) override;
    std::string name() const override { return "http"; }
    std::string model_id() const override { return config_.model_id; }

    nlohmann::ordered_json request_body(const promptgen::PromptSpec& spec, const GenerationParams& params) const;

private:
    struct InFlight;

    BackendConfig config_;
    Sleeper sleeper_;
    std::string origin_;
    std::string path_;
    RateLimiter limiter_;
    std::unique_ptr<InFlight> in_flight_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const persona::AttributeSpace& space);

}  // namespace woc::backends
