#include "woc/backends.hpp"

#include <algorithm>
#include <cmath>

#include "woc/extraction.hpp"
#include "woc/hashing.hpp"
#include "woc/rng.hpp"

namespace woc::backends {

std::string mock_generate(const persona::AttributeSpace& space, const promptgen::PromptSpec& spec,
                          const GenerationParams& params, const CrowdModel& crowd) {
    std::string preimage;
    append_field(preimage, spec.prompt_hash);
    append_field(preimage, std::to_string(params.seed));
    const Sha256Digest digest = sha256(preimage);
    const double u_refusal = word_to_unit_open(digest_word(digest, 0));
    const double u_unit = word_to_unit_open(digest_word(digest, 1));
    const double u_component = word_to_unit_open(digest_word(digest, 2));
    const double u_value = word_to_unit_open(digest_word(digest, 3));

    if (u_refusal < crowd.refusal_rate) {
        return "I'm sorry, but I can't give a reliable estimate for that distance.";
    }

    const MixtureComponent* component = &crowd.components.back();
    double cumulative = 0.0;
    for (const auto& c : crowd.components) {
        cumulative += c.weight;
        if (u_component < cumulative) {
            component = &c;
            break;
        }
    }
    double miles = component->distribution.quantile(u_value);

    if (spec.persona && !crowd.persona_bias.empty()) {
        for (std::size_t i = 0; i < space.size() && i < spec.persona->values.size(); ++i) {
            const auto it = crowd.persona_bias.find(space.at(i).name + "=" + spec.persona->values[i]);
            if (it != crowd.persona_bias.end()) {
                miles += it->second;
            }
        }
    }
    // The extractor only accepts positive estimates.
    miles = std::max(miles, 1.0);

    if (u_unit < crowd.unit_mix) {
        const long long km = std::llround(miles / extraction::kMilesPerKilometer);
        return "I estimate the distance is about " + std::to_string(km) + " km.";
    }
    return "I estimate the distance is about " + std::to_string(std::llround(miles)) + " miles.";
}

MockBackend::MockBackend(persona::AttributeSpace space, CrowdModel crowd, std::string model_id)
    : space_(std::move(space)), crowd_(std::move(crowd)), model_id_(std::move(model_id)) {
    crowd_.validate();
}

Generation MockBackend::generate(const promptgen::PromptSpec& spec, const GenerationParams& params) {
    ++calls_;
    return {mock_generate(space_, spec, params, crowd_), 1};
}

}  // namespace woc::backends
