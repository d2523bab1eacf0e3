#include "woc/backends.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "woc/rng.hpp"

namespace woc::backends {

namespace {

std::string_view kind_name(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::Constant: return "constant";
        case DistributionKind::Normal: return "normal";
        case DistributionKind::LogNormal: return "lognormal";
        case DistributionKind::Uniform: return "uniform";
    }
    return "constant";
}

nlohmann::ordered_json to_json(const Distribution& d) {
    nlohmann::ordered_json doc;
    doc["kind"] = kind_name(d.kind);
    switch (d.kind) {
        case DistributionKind::Constant: doc["value"] = d.a; break;
        case DistributionKind::Normal:
        case DistributionKind::LogNormal:
            doc["mu"] = d.a;
            doc["sigma"] = d.b;
            break;
        case DistributionKind::Uniform:
            doc["lo"] = d.a;
            doc["hi"] = d.b;
            break;
    }
    return doc;
}

Distribution distribution_from_json(const nlohmann::json& doc) {
    const auto kind = doc.at("kind").get<std::string>();
    Distribution d;
    if (kind == "constant") {
        d = {DistributionKind::Constant, doc.at("value").get<double>(), 0.0};
    } else if (kind == "normal") {
        d = {DistributionKind::Normal, doc.at("mu").get<double>(), doc.at("sigma").get<double>()};
    } else if (kind == "lognormal") {
        d = {DistributionKind::LogNormal, doc.at("mu").get<double>(), doc.at("sigma").get<double>()};
    } else if (kind == "uniform") {
        d = {DistributionKind::Uniform, doc.at("lo").get<double>(), doc.at("hi").get<double>()};
    } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown distribution kind '" + kind + "'");
    }
    return d;
}

}  // namespace

double Distribution::quantile(double u) const {
    switch (kind) {
        case DistributionKind::Constant: return a;
        case DistributionKind::Normal:
            return b == 0.0 ? a : boost::math::quantile(boost::math::normal_distribution<double>(a, b), u);
        case DistributionKind::LogNormal:
            return std::exp(a + (b == 0.0 ? 0.0
                                          : b * boost::math::quantile(boost::math::normal_distribution<double>(), u)));
        case DistributionKind::Uniform: return a + (b - a) * u;
    }
    return a;
}

CrowdModel CrowdModel::constant(double value) {
    CrowdModel crowd;
    crowd.components = {{1.0, {DistributionKind::Constant, value, 0.0}}};
    return crowd;
}

CrowdModel CrowdModel::normal(double mean, double sd) {
    CrowdModel crowd;
    crowd.components = {{1.0, {DistributionKind::Normal, mean, sd}}};
    return crowd;
}

void CrowdModel::validate() const {
    if (components.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "crowd model needs at least one component");
    }
    double total = 0.0;
    for (const auto& c : components) {
        if (c.weight < 0.0) {
            throw Error(ErrorKind::ConfigInvalid, "mixture weights must be non-negative");
        }
        if ((c.distribution.kind == DistributionKind::Normal || c.distribution.kind == DistributionKind::LogNormal) &&
            c.distribution.b < 0.0) {
            throw Error(ErrorKind::ConfigInvalid, "sigma must be non-negative");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error(ErrorKind::ConfigInvalid, "mixture weights must sum to 1");
    }
    for (double p : {unit_mix, refusal_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorKind::ConfigInvalid, "probabilities must lie in [0, 1]");
        }
    }
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Http && (!endpoint_url || endpoint_url->empty())) {
        throw Error(ErrorKind::ConfigInvalid, "http backend requires endpoint_url");
    }
    if (max_in_flight < 1) {
        throw Error(ErrorKind::ConfigInvalid, "max_in_flight must be >= 1");
    }
    if (retry.max_attempts < 1) {
        throw Error(ErrorKind::ConfigInvalid, "retry.max_attempts must be >= 1");
    }
    if (retry.base_backoff.count() < 0 || retry.max_backoff < retry.base_backoff) {
        throw Error(ErrorKind::ConfigInvalid, "retry backoff must satisfy 0 <= base <= max");
    }
    if (rate_limit < 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "rate_limit must be >= 0");
    }
    if (kind == BackendKind::Mock) {
        crowd.validate();
    }
}

nlohmann::ordered_json to_json(const GenerationParams& params) {
    nlohmann::ordered_json doc;
    doc["temperature"] = params.temperature;
    doc["top_p"] = params.top_p;
    doc["max_tokens"] = params.max_tokens;
    doc["seed"] = params.seed;
    return doc;
}

GenerationParams generation_params_from_json(const nlohmann::json& doc) {
    GenerationParams params;
    try {
        params.temperature = doc.value("temperature", params.temperature);
        params.top_p = doc.value("top_p", params.top_p);
        params.max_tokens = doc.value("max_tokens", params.max_tokens);
        params.seed = doc.value("seed", params.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad gen_params: ") + e.what());
    }
    if (params.temperature < 0.0 || !(params.top_p > 0.0 && params.top_p <= 1.0) || params.max_tokens < 1) {
        throw Error(ErrorKind::ConfigInvalid, "gen_params out of range");
    }
    return params;
}

nlohmann::ordered_json to_json(const CrowdModel& crowd) {
    nlohmann::ordered_json doc;
    if (crowd.components.size() == 1) {
        doc["distribution"] = to_json(crowd.components.front().distribution);
    } else {
        nlohmann::ordered_json components = nlohmann::ordered_json::array();
        for (const auto& c : crowd.components) {
            auto item = to_json(c.distribution);
            item["weight"] = c.weight;
            components.push_back(std::move(item));
        }
        doc["distribution"] = {{"kind", "mixture"}, {"components", std::move(components)}};
    }
    doc["unit_mix"] = crowd.unit_mix;
    doc["refusal_rate"] = crowd.refusal_rate;
    doc["persona_bias"] = crowd.persona_bias;
    return doc;
}

CrowdModel crowd_model_from_json(const nlohmann::json& doc) {
    CrowdModel crowd;
    try {
        if (doc.contains("distribution")) {
            const auto& dist = doc.at("distribution");
            crowd.components.clear();
            if (dist.at("kind").get<std::string>() == "mixture") {
                for (const auto& item : dist.at("components")) {
                    crowd.components.push_back({item.at("weight").get<double>(), distribution_from_json(item)});
                }
            } else {
                crowd.components.push_back({1.0, distribution_from_json(dist)});
            }
        }
        crowd.unit_mix = doc.value("unit_mix", 0.0);
        crowd.refusal_rate = doc.value("refusal_rate", 0.0);
        if (doc.contains("persona_bias")) {
            crowd.persona_bias = doc.at("persona_bias").get<std::map<std::string, double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad crowd model: ") + e.what());
    }
    crowd.validate();
    return crowd;
}

nlohmann::ordered_json to_json(const BackendConfig& config) {
    nlohmann::ordered_json doc;
    doc["kind"] = config.kind == BackendKind::Mock ? "mock" : "http";
    doc["endpoint_url"] = config.endpoint_url ? nlohmann::ordered_json(*config.endpoint_url) : nlohmann::ordered_json();
    doc["model_id"] = config.model_id;
    doc["max_in_flight"] = config.max_in_flight;
    doc["request_timeout_ms"] = config.request_timeout.count();
    doc["retry"] = {{"max_attempts", config.retry.max_attempts},
                    {"base_backoff_ms", config.retry.base_backoff.count()},
                    {"max_backoff_ms", config.retry.max_backoff.count()}};
    doc["rate_limit"] = config.rate_limit;
    doc["api_key_env"] = config.api_key_env;
    if (config.kind == BackendKind::Mock) {
        doc["crowd"] = to_json(config.crowd);
    }
    return doc;
}

BackendConfig backend_config_from_json(const nlohmann::json& doc) {
    BackendConfig config;
    try {
        const auto kind = doc.value("kind", std::string("mock"));
        if (kind == "mock") {
            config.kind = BackendKind::Mock;
        } else if (kind == "http") {
            config.kind = BackendKind::Http;
        } else {
            throw Error(ErrorKind::ConfigInvalid, "unknown backend kind '" + kind + "'");
        }
        if (doc.contains("endpoint_url") && !doc.at("endpoint_url").is_null()) {
            config.endpoint_url = doc.at("endpoint_url").get<std::string>();
        }
        config.model_id = doc.value("model_id", config.kind == BackendKind::Mock ? config.model_id : std::string());
        config.max_in_flight = doc.value("max_in_flight", config.max_in_flight);
        config.request_timeout = std::chrono::milliseconds(doc.value("request_timeout_ms", config.request_timeout.count()));
        if (doc.contains("retry")) {
            const auto& r = doc.at("retry");
            config.retry.max_attempts = r.value("max_attempts", config.retry.max_attempts);
            config.retry.base_backoff = std::chrono::milliseconds(r.value("base_backoff_ms", config.retry.base_backoff.count()));
            config.retry.max_backoff = std::chrono::milliseconds(r.value("max_backoff_ms", config.retry.max_backoff.count()));
        }
        config.rate_limit = doc.value("rate_limit", config.rate_limit);
        config.api_key_env = doc.value("api_key_env", config.api_key_env);
        if (doc.contains("crowd")) {
            config.crowd = crowd_model_from_json(doc.at("crowd"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad backend config: ") + e.what());
    }
    config.validate();
    return config;
}

BackoffSchedule::BackoffSchedule(RetryPolicy policy, std::uint64_t jitter_seed)
    : policy_(policy), jitter_seed_(jitter_seed) {}

std::chrono::milliseconds BackoffSchedule::delay_after(int failed_attempt) const {
    const int exponent = std::clamp(failed_attempt - 1, 0, 62);
    const double base = static_cast<double>(policy_.base_backoff.count()) * std::ldexp(1.0, exponent);
    Rng rng = Rng::stream({jitter_seed_, static_cast<std::uint64_t>(failed_attempt)});
    const double jittered = base * (1.0 + 0.5 * rng.unit_open());
    const double capped = std::min(jittered, static_cast<double>(policy_.max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

RateLimiter::RateLimiter(double requests_per_second) {
    if (requests_per_second > 0.0) {
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second));
    }
}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) {
        return;
    }
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        slot = std::max(std::chrono::steady_clock::now(), next_slot_);
        next_slot_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config, const persona::AttributeSpace& space) {
    config.validate();
    if (config.kind == BackendKind::Mock) {
        return std::make_unique<MockBackend>(space, config.crowd, config.model_id);
    }
    return std::make_unique<HttpBackend>(config);
}

}  // namespace woc::backends
