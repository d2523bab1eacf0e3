#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace woc::emotions {

// LoRA recipe handed to the Python fine-tuning script next to the training file.
struct FinetuneConfig {
    int lora_rank = 16;
    int lora_alpha = 16;
    double lora_dropout = 0.0;
    std::vector<std::string> target_modules = {"q_proj", "k_proj", "v_proj", "gate_proj", "embed_tokens"};
    int quantization_bits = 4;
    int max_seq_len = 2048;
    int batch_size = 2;
    int grad_accum_steps = 4;
    double learning_rate = 2e-4;
    double weight_decay = 0.01;
    int warmup_steps = 5;
    int epochs = 1;
    std::string base_model_id = "QuantFactory/DarkIdol-Llama-3.1-8B-Instruct-1.2-Uncensored-GGUF";
    std::string training_file = "train.jsonl";
    std::string prompt_template = "emotion-to-text";

    bool operator==(const FinetuneConfig&) const = default;
};

nlohmann::ordered_json to_json(const FinetuneConfig& config);
FinetuneConfig finetune_config_from_json(const nlohmann::json& doc);

}  // namespace woc::emotions
