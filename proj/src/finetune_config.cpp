#include "woc/finetune_config.hpp"

#include "woc/error.hpp"

namespace woc::emotions {

nlohmann::ordered_json to_json(const FinetuneConfig& config) {
    nlohmann::ordered_json doc;
    doc["base_model_id"] = config.base_model_id;
    doc["lora"] = {{"r", config.lora_rank},
                   {"alpha", config.lora_alpha},
                   {"dropout", config.lora_dropout},
                   {"target_modules", config.target_modules}};
    doc["quantization_bits"] = config.quantization_bits;
    doc["max_seq_len"] = config.max_seq_len;
    doc["training"] = {{"batch_size", config.batch_size},
                       {"grad_accum_steps", config.grad_accum_steps},
                       {"learning_rate", config.learning_rate},
                       {"weight_decay", config.weight_decay},
                       {"warmup_steps", config.warmup_steps},
                       {"epochs", config.epochs}};
    doc["data"] = {{"training_file", config.training_file}, {"prompt_template", config.prompt_template}};
    return doc;
}

FinetuneConfig finetune_config_from_json(const nlohmann::json& doc) {
    FinetuneConfig config;
    try {
        config.base_model_id = doc.value("base_model_id", config.base_model_id);
        if (doc.contains("lora")) {
            const auto& lora = doc.at("lora");
            config.lora_rank = lora.value("r", config.lora_rank);
            config.lora_alpha = lora.value("alpha", config.lora_alpha);
            config.lora_dropout = lora.value("dropout", config.lora_dropout);
            config.target_modules = lora.value("target_modules", config.target_modules);
        }
        config.quantization_bits = doc.value("quantization_bits", config.quantization_bits);
        config.max_seq_len = doc.value("max_seq_len", config.max_seq_len);
        if (doc.contains("training")) {
            const auto& t = doc.at("training");
            config.batch_size = t.value("batch_size", config.batch_size);
            config.grad_accum_steps = t.value("grad_accum_steps", config.grad_accum_steps);
            config.learning_rate = t.value("learning_rate", config.learning_rate);
            config.weight_decay = t.value("weight_decay", config.weight_decay);
            config.warmup_steps = t.value("warmup_steps", config.warmup_steps);
            config.epochs = t.value("epochs", config.epochs);
        }
        if (doc.contains("data")) {
            config.training_file = doc.at("data").value("training_file", config.training_file);
            config.prompt_template = doc.at("data").value("prompt_template", config.prompt_template);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad fine-tune config: ") + e.what());
    }
    if (config.lora_rank <= 0 || config.learning_rate <= 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "lora rank and learning rate must be positive");
    }
    return config;
}

}  // namespace woc::emotions
