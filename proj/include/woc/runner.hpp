#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "woc/backends.hpp"
#include "woc/crowdstats.hpp"
#include "woc/emotions.hpp"
#include "woc/persona.hpp"
#include "woc/promptgen.hpp"

namespace woc::runner {

inline constexpr std::string_view kCodeVersion = "woc 0.1.0";

enum class Phase { Baseline, Sequential, PostFinetune };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view name);

struct AnalysisConfig {
    std::vector<std::size_t> grid;  // empty = default 28-point grid
    std::size_t trials = 1000;
    crowdstats::Aggregator aggregator;
    double epsilon = 0.005;
    crowdstats::AcceptanceRange range;
    std::uint64_t seed = 0;
    std::uint64_t exhaustive_cap = 100000;
};

struct ExperimentConfig {
    std::string run_id = "run";
    Phase phase = Phase::Baseline;
    std::vector<promptgen::PromptType> prompt_types{std::begin(promptgen::kAllPromptTypes),
                                                    std::end(promptgen::kAllPromptTypes)};
    // Personas come from this file when set, otherwise they are sampled.
    std::optional<std::filesystem::path> persona_file;
    std::uint64_t persona_seed = 42;
    // "default", "none", or a path to a rules JSON file.
    std::string rules = "default";
    std::optional<std::filesystem::path> emotion_assignment_file;
    emotions::AssignmentMode assignment_mode = emotions::AssignmentMode::Balanced;
    std::uint64_t assignment_seed = 7;
    bool include_neutral = true;
    std::size_t n_personas = 15064;
    backends::BackendConfig backend;
    backends::GenerationParams gen_params;
    // Empty = the question from the prompt templates.
    std::string question;
    std::optional<std::filesystem::path> template_file;
    AnalysisConfig analysis;
    std::filesystem::path output_dir = "out";

    void validate() const;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const AnalysisConfig& analysis);
AnalysisConfig analysis_config_from_json(const nlohmann::json& doc);

struct ResolvedInputs {
    persona::AttributeSpace space;
    std::vector<persona::PersonaConfig> personas;
    emotions::EmotionAssignment assignment;
    promptgen::PromptTemplates templates;
    std::string question;
};

ResolvedInputs resolve_inputs(const ExperimentConfig& config);

std::vector<promptgen::PromptSpec> plan_workload(const ExperimentConfig& config, const ResolvedInputs& inputs);
std::vector<promptgen::PromptSpec> plan_workload(const ExperimentConfig& config);

struct ResponseRecord {
    std::string prompt_hash;
    promptgen::PromptType prompt_type = promptgen::PromptType::Base;
    std::optional<std::string> persona_id;
    std::optional<std::string> emotion;
    std::uint32_t replicate = 0;
    std::string template_version;
    std::string system_message;
    std::string user_message;
    std::string raw_text;
    std::optional<double> extracted_miles;
    std::string extraction_rule = "none";
    std::string status = "ok";  // "ok" | "error"
    std::optional<std::string> error;
    std::string backend;
    std::string model_id;
    backends::GenerationParams gen_params;
    std::string timestamp;
    int attempt_count = 0;
};

nlohmann::ordered_json to_json(const ResponseRecord& record);
ResponseRecord record_from_json(const nlohmann::json& doc);

struct LoadedRecords {
    std::vector<ResponseRecord> records;
    std::size_t malformed_lines = 0;
};

LoadedRecords read_records(const std::filesystem::path& path);

struct ExecuteOptions {
    bool resume = false;
    // Stop dispatching after this many new records; simulates an interrupted run.
    std::optional<std::size_t> stop_after;
    std::ostream* log = nullptr;
};

struct ExecuteResult {
    std::filesystem::path responses_file;
    std::filesystem::path manifest_file;
    std::size_t planned = 0;
    std::size_t already_persisted = 0;
    std::size_t new_records = 0;
    std::size_t error_records = 0;
    bool complete = false;
};

std::filesystem::path responses_path(const ExperimentConfig& config);
std::filesystem::path manifest_path(const ExperimentConfig& config);

ExecuteResult execute(const ExperimentConfig& config, backends::Backend& backend, const ExecuteOptions& options = {});
ExecuteResult execute(const ExperimentConfig& config, const ExecuteOptions& options = {});

struct Finding {
    std::string kind;
    std::string detail;
};

struct VerifyReport {
    std::vector<Finding> findings;
    std::size_t records = 0;
    std::size_t planned = 0;
    std::size_t extraction_misses = 0;
    std::map<std::string, std::size_t> per_prompt_type;
    // prompt type -> emotion -> count, for emotion-bearing prompt types
    std::map<std::string, std::map<std::string, std::size_t>> per_emotion;

    bool ok() const { return findings.empty(); }
    double miss_rate() const;
    std::string to_text() const;
};

VerifyReport verify_run(const std::filesystem::path& responses_file, const ExperimentConfig& config);

struct TypeAnalysis {
    promptgen::PromptType type;
    crowdstats::AccuracyCurve curve;
    crowdstats::OptimalSubsetResult optimal;
    std::filesystem::path curve_file;
};

// One curve per prompt type present in the responses, written to out_dir as
// curve_<type>.csv plus its JSON sidecar.
std::vector<TypeAnalysis> analyze_responses(const std::filesystem::path& responses_file,
                                            const AnalysisConfig& analysis, const std::filesystem::path& out_dir,
                                            std::ostream* log = nullptr);

std::string utc_timestamp();

}  // namespace woc::runner
