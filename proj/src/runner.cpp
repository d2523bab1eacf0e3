#include "woc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "woc/error.hpp"
#include "woc/extraction.hpp"
#include "woc/reporting.hpp"

namespace fs = std::filesystem;

namespace woc::runner {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

fs::path resolve_path(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
    return doc.contains(key) && !doc.at(key).is_null() ? doc.at(key).get<T>() : fallback;
}

void write_atomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out || !(out << content).flush()) {
            throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure, "cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

// Drops a trailing partial line left behind by an interrupted writer.
void repair_tail(const fs::path& path, std::ostream* log) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size == 0) {
        return;
    }
    std::string content(size, '\0');
    in.seekg(0);
    in.read(content.data(), static_cast<std::streamsize>(size));
    if (content.back() == '\n') {
        return;
    }
    const auto last_newline = content.rfind('\n');
    const std::size_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
    in.close();
    fs::resize_file(path, keep);
    if (log) {
        *log << "resume: dropped " << (size - keep) << " bytes of incomplete trailing record\n";
    }
}

std::map<std::string, std::size_t> count_by_type(const std::vector<promptgen::PromptSpec>& plan) {
    std::map<std::string, std::size_t> counts;
    for (const auto& spec : plan) {
        ++counts[std::string(promptgen::to_string(spec.type))];
    }
    return counts;
}

}  // namespace

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Baseline: return "baseline";
        case Phase::Sequential: return "sequential";
        case Phase::PostFinetune: return "post_finetune";
    }
    return "baseline";
}

Phase phase_from_string(std::string_view name) {
    for (Phase p : {Phase::Baseline, Phase::Sequential, Phase::PostFinetune}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown phase '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (prompt_types.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "prompt_types must not be empty");
    }
    std::set<promptgen::PromptType> unique(prompt_types.begin(), prompt_types.end());
    if (unique.size() != prompt_types.size()) {
        throw Error(ErrorKind::ConfigInvalid, "prompt_types contains duplicates");
    }
    if (n_personas < 1) {
        throw Error(ErrorKind::ConfigInvalid, "n_personas must be >= 1");
    }
    if (analysis.trials < 1 || analysis.epsilon < 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "analysis.trials must be >= 1 and epsilon >= 0");
    }
    analysis.range.validate();
    backend.validate();
    if (output_dir.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "output_dir must be set");
    }
}

nlohmann::ordered_json to_json(const AnalysisConfig& analysis) {
    ordered_json doc;
    doc["grid"] = analysis.grid;
    doc["trials"] = analysis.trials;
    doc["aggregator"] = analysis.aggregator.name();
    doc["epsilon"] = analysis.epsilon;
    doc["range"] = {{"lo", analysis.range.lo}, {"hi", analysis.range.hi}, {"true_value", analysis.range.true_value}};
    doc["seed"] = analysis.seed;
    doc["exhaustive_cap"] = analysis.exhaustive_cap;
    return doc;
}

AnalysisConfig analysis_config_from_json(const nlohmann::json& doc) {
    AnalysisConfig a;
    try {
        a.grid = get_or(doc, "grid", a.grid);
        a.trials = get_or(doc, "trials", a.trials);
        a.aggregator = crowdstats::Aggregator::parse(get_or(doc, "aggregator", std::string("mean")));
        a.epsilon = get_or(doc, "epsilon", a.epsilon);
        if (doc.contains("range")) {
            const auto& r = doc.at("range");
            a.range.lo = get_or(r, "lo", a.range.lo);
            a.range.hi = get_or(r, "hi", a.range.hi);
            a.range.true_value = get_or(r, "true_value", a.range.true_value);
        }
        a.seed = get_or(doc, "seed", a.seed);
        a.exhaustive_cap = get_or(doc, "exhaustive_cap", a.exhaustive_cap);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad analysis section: ") + e.what());
    }
    return a;
}

ExperimentConfig config_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
    ExperimentConfig c;
    try {
        c.run_id = get_or(doc, "run_id", c.run_id);
        c.phase = phase_from_string(get_or(doc, "phase", std::string("baseline")));
        if (doc.contains("prompt_types")) {
            c.prompt_types.clear();
            for (const auto& t : doc.at("prompt_types")) {
                c.prompt_types.push_back(promptgen::prompt_type_from_string(t.get<std::string>()));
            }
        }
        if (doc.contains("persona_file") && !doc.at("persona_file").is_null()) {
            c.persona_file = resolve_path(base_dir, doc.at("persona_file").get<std::string>());
        }
        c.persona_seed = get_or(doc, "persona_seed", c.persona_seed);
        c.rules = get_or(doc, "rules", c.rules);
        if (c.rules != "default" && c.rules != "none") {
            c.rules = resolve_path(base_dir, c.rules).string();
        }
        if (doc.contains("emotion_assignment") && !doc.at("emotion_assignment").is_null()) {
            const auto& ea = doc.at("emotion_assignment");
            if (ea.is_string()) {
                c.emotion_assignment_file = resolve_path(base_dir, ea.get<std::string>());
            } else {
                c.assignment_mode = emotions::assignment_mode_from_string(get_or(ea, "mode", std::string("balanced")));
                c.assignment_seed = get_or(ea, "seed", c.assignment_seed);
                c.include_neutral = get_or(ea, "include_neutral", c.include_neutral);
            }
        }
        c.n_personas = get_or(doc, "n_personas", c.n_personas);
        if (doc.contains("backend")) {
            c.backend = backends::backend_config_from_json(doc.at("backend"));
        }
        if (doc.contains("gen_params")) {
            c.gen_params = backends::generation_params_from_json(doc.at("gen_params"));
        }
        c.question = get_or(doc, "question", c.question);
        if (doc.contains("template_file") && !doc.at("template_file").is_null()) {
            c.template_file = resolve_path(base_dir, doc.at("template_file").get<std::string>());
        }
        if (doc.contains("analysis")) {
            c.analysis = analysis_config_from_json(doc.at("analysis"));
        }
        c.output_dir = resolve_path(base_dir, get_or(doc, "output_dir", c.output_dir.string()));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
    }
    return config_from_json(doc, path.parent_path());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    ordered_json doc;
    doc["run_id"] = c.run_id;
    doc["phase"] = to_string(c.phase);
    ordered_json types = ordered_json::array();
    for (auto t : c.prompt_types) {
        types.push_back(promptgen::to_string(t));
    }
    doc["prompt_types"] = std::move(types);
    doc["persona_file"] = c.persona_file ? ordered_json(c.persona_file->string()) : nlohmann::ordered_json();
    doc["persona_seed"] = c.persona_seed;
    doc["rules"] = c.rules;
    if (c.emotion_assignment_file) {
        doc["emotion_assignment"] = c.emotion_assignment_file->string();
    } else {
        doc["emotion_assignment"] = {{"mode", emotions::to_string(c.assignment_mode)},
                                     {"seed", c.assignment_seed},
                                     {"include_neutral", c.include_neutral}};
    }
    doc["n_personas"] = c.n_personas;
    doc["backend"] = backends::to_json(c.backend);
    doc["gen_params"] = backends::to_json(c.gen_params);
    doc["question"] = c.question;
    doc["template_file"] = c.template_file ? ordered_json(c.template_file->string()) : nlohmann::ordered_json();
    doc["analysis"] = to_json(c.analysis);
    doc["output_dir"] = c.output_dir.string();
    return doc;
}

ResolvedInputs resolve_inputs(const ExperimentConfig& config) {
    persona::AttributeSpace space = persona::build_attribute_space();
    std::vector<persona::ConsistencyRule> rules;
    if (config.rules == "default") {
        rules = persona::default_rules();
    } else if (config.rules != "none") {
        rules = persona::load_rules(config.rules);
    }

    std::vector<persona::PersonaConfig> personas;
    if (config.persona_file) {
        personas = persona::read_persona_file(space, *config.persona_file);
        if (personas.size() < config.n_personas) {
            throw Error(ErrorKind::ConfigInvalid, config.persona_file->string() + " holds " +
                                                      std::to_string(personas.size()) + " personas, config asks for " +
                                                      std::to_string(config.n_personas));
        }
        personas.resize(config.n_personas);
    } else {
        personas = persona::sample_personas(space, config.n_personas, config.persona_seed, rules);
    }

    emotions::EmotionAssignment assignment;
    if (config.emotion_assignment_file) {
        assignment = emotions::read_assignment_file(*config.emotion_assignment_file);
        std::unordered_set<std::string> covered;
        for (const auto& e : assignment.entries) {
            covered.insert(e.persona_id);
        }
        for (const auto& p : personas) {
            if (!covered.count(p.persona_id)) {
                throw Error(ErrorKind::ConfigInvalid, "emotion assignment lacks persona " + p.persona_id);
            }
        }
    } else {
        assignment =
            emotions::assign_emotions(personas, config.assignment_mode, config.assignment_seed, config.include_neutral);
    }

    promptgen::PromptTemplates templates =
        config.template_file ? promptgen::load_templates(*config.template_file) : promptgen::default_templates();
    std::string question = config.question.empty() ? templates.question : config.question;
    return {std::move(space), std::move(personas), std::move(assignment), std::move(templates), std::move(question)};
}

std::vector<promptgen::PromptSpec> plan_workload(const ExperimentConfig& config, const ResolvedInputs& inputs) {
    using promptgen::PromptType;
    std::unordered_map<std::string, emotions::EmotionLabel> emotion_of;
    for (const auto& e : inputs.assignment.entries) {
        emotion_of.emplace(e.persona_id, e.emotion);
    }
    const std::size_t n = inputs.personas.size();
    std::vector<promptgen::PromptSpec> plan;
    for (PromptType type : config.prompt_types) {
        switch (type) {
            case PromptType::FullContext:
                for (const auto& p : inputs.personas) {
                    const auto it = emotion_of.find(p.persona_id);
                    if (it == emotion_of.end()) {
                        throw Error(ErrorKind::ConfigInvalid, "no emotion assigned to persona " + p.persona_id);
                    }
                    plan.push_back(promptgen::build_prompt(inputs.space, type, p, it->second, inputs.question, 0,
                                                           inputs.templates));
                }
                break;
            case PromptType::AttributesOnly:
                for (const auto& p : inputs.personas) {
                    plan.push_back(promptgen::build_prompt(inputs.space, type, p, std::nullopt, inputs.question, 0,
                                                           inputs.templates));
                }
                break;
            case PromptType::EmotionalOnly: {
                // Same population size as the persona-based types: ceil(n / labels) replicates per emotion.
                const auto labels = emotions::assignable_labels(config.include_neutral);
                const std::size_t replicates = (n + labels.size() - 1) / labels.size();
                for (const auto& label : labels) {
                    for (std::size_t r = 0; r < replicates; ++r) {
                        plan.push_back(promptgen::build_prompt(inputs.space, type, std::nullopt, label,
                                                               inputs.question, static_cast<std::uint32_t>(r),
                                                               inputs.templates));
                    }
                }
                break;
            }
            case PromptType::Base:
                for (std::size_t r = 0; r < n; ++r) {
                    plan.push_back(promptgen::build_prompt(inputs.space, type, std::nullopt, std::nullopt,
                                                           inputs.question, static_cast<std::uint32_t>(r),
                                                           inputs.templates));
                }
                break;
        }
    }
    return plan;
}

std::vector<promptgen::PromptSpec> plan_workload(const ExperimentConfig& config) {
    return plan_workload(config, resolve_inputs(config));
}

nlohmann::ordered_json to_json(const ResponseRecord& r) {
    ordered_json doc;
    doc["prompt_hash"] = r.prompt_hash;
    doc["prompt_type"] = promptgen::to_string(r.prompt_type);
    doc["persona_id"] = r.persona_id ? ordered_json(*r.persona_id) : nlohmann::ordered_json();
    doc["emotion"] = r.emotion ? ordered_json(*r.emotion) : nlohmann::ordered_json();
    doc["replicate"] = r.replicate;
    doc["template_version"] = r.template_version;
    doc["system_message"] = r.system_message;
    doc["user_message"] = r.user_message;
    doc["raw_text"] = r.raw_text;
    doc["extracted_miles"] = r.extracted_miles ? ordered_json(*r.extracted_miles) : nlohmann::ordered_json();
    doc["extraction_rule"] = r.extraction_rule;
    doc["status"] = r.status;
    doc["error"] = r.error ? ordered_json(*r.error) : nlohmann::ordered_json();
    doc["backend"] = r.backend;
    doc["model_id"] = r.model_id;
    doc["gen_params"] = backends::to_json(r.gen_params);
    doc["timestamp"] = r.timestamp;
    doc["attempt_count"] = r.attempt_count;
    return doc;
}

ResponseRecord record_from_json(const nlohmann::json& doc) {
    ResponseRecord r;
    r.prompt_hash = doc.at("prompt_hash").get<std::string>();
    r.prompt_type = promptgen::prompt_type_from_string(doc.at("prompt_type").get<std::string>());
    if (!doc.at("persona_id").is_null()) r.persona_id = doc.at("persona_id").get<std::string>();
    if (!doc.at("emotion").is_null()) r.emotion = doc.at("emotion").get<std::string>();
    r.replicate = get_or(doc, "replicate", r.replicate);
    r.template_version = get_or(doc, "template_version", r.template_version);
    r.system_message = get_or(doc, "system_message", r.system_message);
    r.user_message = get_or(doc, "user_message", r.user_message);
    r.raw_text = doc.at("raw_text").get<std::string>();
    if (!doc.at("extracted_miles").is_null()) r.extracted_miles = doc.at("extracted_miles").get<double>();
    r.extraction_rule = get_or(doc, "extraction_rule", r.extraction_rule);
    r.status = get_or(doc, "status", r.status);
    if (doc.contains("error") && !doc.at("error").is_null()) r.error = doc.at("error").get<std::string>();
    r.backend = get_or(doc, "backend", r.backend);
    r.model_id = get_or(doc, "model_id", r.model_id);
    if (doc.contains("gen_params")) r.gen_params = backends::generation_params_from_json(doc.at("gen_params"));
    r.timestamp = get_or(doc, "timestamp", r.timestamp);
    r.attempt_count = get_or(doc, "attempt_count", r.attempt_count);
    return r;
}

LoadedRecords read_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open responses file " + path.string());
    }
    LoadedRecords loaded;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            loaded.records.push_back(record_from_json(json::parse(line)));
        } catch (const std::exception&) {
            ++loaded.malformed_lines;
        }
    }
    return loaded;
}

fs::path responses_path(const ExperimentConfig& config) { return config.output_dir / "responses.jsonl"; }
fs::path manifest_path(const ExperimentConfig& config) { return config.output_dir / "manifest.json"; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ExecuteResult execute(const ExperimentConfig& config, backends::Backend& backend, const ExecuteOptions& options) {
    config.validate();
    const std::string started_at = utc_timestamp();
    const ResolvedInputs inputs = resolve_inputs(config);
    const auto plan = plan_workload(config, inputs);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure, "cannot create " + config.output_dir.string() + ": " + ec.message());
    }
    ExecuteResult result;
    result.responses_file = responses_path(config);
    result.manifest_file = manifest_path(config);
    result.planned = plan.size();

    std::unordered_set<std::string> persisted;
    if (fs::exists(result.responses_file)) {
        if (!options.resume) {
            throw Error(ErrorKind::ConfigInvalid,
                        result.responses_file.string() + " already exists; pass --resume to continue it");
        }
        repair_tail(result.responses_file, options.log);
        for (const auto& r : read_records(result.responses_file).records) {
            persisted.insert(r.prompt_hash);
        }
    }
    if (const auto p = config.output_dir / "personas.jsonl"; !fs::exists(p)) {
        persona::write_persona_file(inputs.space, inputs.personas, p);
    }
    if (const auto p = config.output_dir / "assignment.jsonl"; !fs::exists(p)) {
        emotions::write_assignment_file(inputs.assignment, p);
    }

    std::vector<const promptgen::PromptSpec*> pending;
    for (const auto& spec : plan) {
        if (persisted.count(spec.prompt_hash)) {
            ++result.already_persisted;
        } else {
            pending.push_back(&spec);
        }
    }

    std::ofstream out(result.responses_file, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open " + result.responses_file.string() + " for append");
    }
    std::mutex write_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> written{0};
    std::atomic<std::size_t> errors{0};
    std::atomic<bool> abort{false};
    std::exception_ptr fatal;
    const std::string backend_name = backend.name();
    const std::string model_id = backend.model_id();

    auto persist = [&](const ResponseRecord& record) {
        const std::string line =
            to_json(record).dump(-1, ' ', false, ordered_json::error_handler_t::replace) + "\n";
        std::lock_guard lock(write_mutex);
        out.write(line.data(), static_cast<std::streamsize>(line.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorKind::IoFailure, "failed appending to " + result.responses_file.string());
        }
    };

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size() || (options.stop_after && i >= *options.stop_after)) {
                return;
            }
            const auto& spec = *pending[i];
            ResponseRecord record;
            record.prompt_hash = spec.prompt_hash;
            record.prompt_type = spec.type;
            if (spec.persona) record.persona_id = spec.persona->persona_id;
            if (spec.emotion) record.emotion = std::string(spec.emotion->name);
            record.replicate = spec.replicate;
            record.template_version = spec.template_version;
            record.system_message = spec.system_message;
            record.user_message = spec.user_message;
            record.backend = backend_name;
            record.model_id = model_id;
            record.gen_params = config.gen_params;
            try {
                try {
                    const auto generation = backend.generate(spec, config.gen_params);
                    record.raw_text = generation.text;
                    record.attempt_count = generation.attempts;
                    const auto extracted = extraction::extract_miles(record.raw_text);
                    record.extracted_miles = extracted.miles;
                    record.extraction_rule = std::string(extraction::to_string(extracted.rule));
                } catch (const backends::BackendError& e) {
                    record.status = "error";
                    record.error = e.what();
                    record.attempt_count = e.attempts();
                    ++errors;
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::IoFailure || e.kind() == ErrorKind::ConfigInvalid) {
                        throw;
                    }
                    record.status = "error";
                    record.error = e.what();
                    record.attempt_count = 1;
                    ++errors;
                }
                record.timestamp = utc_timestamp();
                persist(record);
                ++written;
            } catch (...) {
                std::lock_guard lock(write_mutex);
                if (!fatal) {
                    fatal = std::current_exception();
                }
                abort = true;
                return;
            }
        }
    };

    const std::size_t threads =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(config.backend.max_in_flight),
                                                       pending.size()));
    if (!pending.empty()) {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    out.close();
    if (fatal) {
        std::rethrow_exception(fatal);
    }
    result.new_records = written.load();
    result.error_records = errors.load();

    // Manifest counts come from the file itself so they reconcile with what was persisted.
    const auto loaded = read_records(result.responses_file);
    std::map<std::string, std::size_t> persisted_by_type;
    std::unordered_set<std::string> hashes;
    std::size_t ok_records = 0;
    std::size_t error_records = 0;
    std::size_t misses = 0;
    for (const auto& r : loaded.records) {
        hashes.insert(r.prompt_hash);
        ++persisted_by_type[std::string(promptgen::to_string(r.prompt_type))];
        if (r.status == "ok") {
            ++ok_records;
            misses += r.extracted_miles ? 0 : 1;
        } else {
            ++error_records;
        }
    }
    std::size_t covered = 0;
    for (const auto& spec : plan) {
        covered += hashes.count(spec.prompt_hash);
    }
    result.complete = covered == plan.size();

    if (result.new_records == 0 && result.complete && fs::exists(result.manifest_file)) {
        std::ifstream in(result.manifest_file);
        ordered_json previous = ordered_json::parse(in, nullptr, false);
        if (!previous.is_discarded() && previous.value("complete", false)) {
            previous["verified_at"] = utc_timestamp();
            write_atomically(result.manifest_file, previous.dump(2) + "\n");
            if (options.log) {
                *options.log << "run " << config.run_id << ": already complete, nothing to do\n";
            }
            return result;
        }
    }

    ordered_json manifest;
    manifest["run_id"] = config.run_id;
    manifest["phase"] = to_string(config.phase);
    manifest["code_version"] = kCodeVersion;
    manifest["template_version"] = inputs.templates.version;
    manifest["templates_note"] = "prompt wording is a reconstruction, not published text";
    manifest["config"] = to_json(config);
    manifest["started_at"] = started_at;
    manifest["finished_at"] = utc_timestamp();
    manifest["resumed"] = options.resume;
    manifest["complete"] = result.complete;
    manifest["planned"] = plan.size();
    manifest["planned_by_type"] = count_by_type(plan);
    manifest["persisted"] = loaded.records.size();
    manifest["persisted_by_type"] = persisted_by_type;
    manifest["ok_records"] = ok_records;
    manifest["error_records"] = error_records;
    manifest["extraction_misses"] = misses;
    manifest["malformed_lines"] = loaded.malformed_lines;
    manifest["new_records_this_invocation"] = result.new_records;
    manifest["verified_at"] = manifest["finished_at"];
    write_atomically(result.manifest_file, manifest.dump(2) + "\n");

    if (options.log) {
        *options.log << "run " << config.run_id << ": planned " << plan.size() << ", already persisted "
                     << result.already_persisted << ", new " << result.new_records << ", errors "
                     << result.error_records << '\n';
    }
    return result;
}

ExecuteResult execute(const ExperimentConfig& config, const ExecuteOptions& options) {
    const auto space = persona::build_attribute_space();
    auto backend = backends::make_backend(config.backend, space);
    return execute(config, *backend, options);
}

double VerifyReport::miss_rate() const {
    return records == 0 ? 0.0 : static_cast<double>(extraction_misses) / static_cast<double>(records);
}

std::string VerifyReport::to_text() const {
    std::ostringstream out;
    out << (ok() ? "OK" : "FINDINGS") << ": " << findings.size() << " findings, " << records << " records, "
        << planned << " planned\n";
    for (const auto& f : findings) {
        out << "  [" << f.kind << "] " << f.detail << '\n';
    }
    for (const auto& [type, count] : per_prompt_type) {
        out << "  type " << type << ": " << count << '\n';
    }
    for (const auto& [type, counts] : per_emotion) {
        std::size_t lo = SIZE_MAX, hi = 0;
        for (const auto& [emotion, count] : counts) {
            lo = std::min(lo, count);
            hi = std::max(hi, count);
        }
        out << "  emotions in " << type << ": " << counts.size() << " labels, counts " << lo << ".." << hi << '\n';
    }
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.4f", miss_rate());
    out << "  extraction misses: " << extraction_misses << " (rate " << rate << ")\n";
    return out.str();
}

VerifyReport verify_run(const fs::path& responses_file, const ExperimentConfig& config) {
    VerifyReport report;
    const auto plan = plan_workload(config);
    report.planned = plan.size();
    const auto loaded = read_records(responses_file);
    report.records = loaded.records.size();
    if (loaded.malformed_lines > 0) {
        report.findings.push_back({"malformed", std::to_string(loaded.malformed_lines) + " unparseable lines"});
    }

    std::unordered_map<std::string, const promptgen::PromptSpec*> planned;
    std::map<std::string, std::map<std::string, std::size_t>> planned_emotions;
    for (const auto& spec : plan) {
        planned.emplace(spec.prompt_hash, &spec);
        if (spec.emotion) {
            ++planned_emotions[std::string(promptgen::to_string(spec.type))][std::string(spec.emotion->name)];
        }
    }

    std::unordered_map<std::string, std::size_t> seen;
    std::size_t unexpected = 0;
    std::size_t error_records = 0;
    std::size_t mismatched = 0;
    for (const auto& r : loaded.records) {
        if (++seen[r.prompt_hash] == 2) {
            report.findings.push_back({"duplicate", "prompt_hash " + r.prompt_hash + " persisted more than once"});
        }
        if (!planned.count(r.prompt_hash)) {
            ++unexpected;
        }
        const std::string type(promptgen::to_string(r.prompt_type));
        ++report.per_prompt_type[type];
        if (r.emotion) {
            ++report.per_emotion[type][*r.emotion];
        }
        if (r.status != "ok") {
            ++error_records;
            continue;
        }
        const auto again = extraction::extract_miles(r.raw_text);
        if (again.miles != r.extracted_miles) {
            ++mismatched;
        }
        if (!r.extracted_miles) {
            ++report.extraction_misses;
        }
    }
    std::size_t missing = 0;
    for (const auto& spec : plan) {
        missing += seen.count(spec.prompt_hash) ? 0 : 1;
    }
    if (missing > 0) {
        report.findings.push_back({"missing", std::to_string(missing) + " planned prompts have no record"});
    }
    if (unexpected > 0) {
        report.findings.push_back({"unexpected", std::to_string(unexpected) + " records are not in the plan"});
    }
    if (error_records > 0) {
        report.findings.push_back({"error_records", std::to_string(error_records) + " records carry error status"});
    }
    if (mismatched > 0) {
        report.findings.push_back(
            {"extraction_mismatch", std::to_string(mismatched) + " records disagree with re-extraction"});
    }
    const auto planned_types = count_by_type(plan);
    for (const auto& [type, count] : planned_types) {
        const auto it = report.per_prompt_type.find(type);
        const std::size_t got = it == report.per_prompt_type.end() ? 0 : it->second;
        if (got != count) {
            report.findings.push_back(
                {"type_count", type + ": " + std::to_string(got) + " records, planned " + std::to_string(count)});
        }
    }
    for (const auto& [type, counts] : planned_emotions) {
        for (const auto& [emotion, count] : counts) {
            const std::size_t got = report.per_emotion[type][emotion];
            if (got != count) {
                report.findings.push_back({"emotion_count", type + "/" + emotion + ": " + std::to_string(got) +
                                                                " records, planned " + std::to_string(count)});
            }
        }
    }
    return report;
}

std::vector<TypeAnalysis> analyze_responses(const fs::path& responses_file, const AnalysisConfig& analysis,
                                            const fs::path& out_dir, std::ostream* log) {
    const auto loaded = read_records(responses_file);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
    }
    std::vector<TypeAnalysis> results;
    for (promptgen::PromptType type : promptgen::kAllPromptTypes) {
        std::vector<double> values;
        std::size_t total = 0;
        for (const auto& r : loaded.records) {
            if (r.prompt_type != type) {
                continue;
            }
            ++total;
            if (r.status == "ok" && r.extracted_miles) {
                values.push_back(*r.extracted_miles);
            }
        }
        if (total == 0) {
            continue;
        }
        if (values.empty()) {
            if (log) {
                *log << "analyze: " << promptgen::to_string(type) << " has no extracted estimates; skipped\n";
            }
            continue;
        }
        crowdstats::SamplingOptions sampling;
        sampling.trials = analysis.trials;
        sampling.seed = analysis.seed;
        sampling.exhaustive_cap = analysis.exhaustive_cap;
        auto grid = analysis.grid.empty() ? crowdstats::default_grid(values.size()) : analysis.grid;
        TypeAnalysis ta{type, crowdstats::sweep(values, grid, analysis.aggregator, analysis.range, sampling), {}, {}};
        ta.curve.meta.label = std::string(promptgen::to_string(type));
        ta.curve.meta.response_level_accuracy = crowdstats::response_level_accuracy(values, analysis.range);
        ta.curve.meta.excluded = total - values.size();
        ta.optimal = crowdstats::find_optimal(ta.curve, analysis.epsilon);
        ta.curve_file = out_dir / ("curve_" + std::string(promptgen::to_string(type)) + ".csv");
        ordered_json extra;
        extra["prompt_type"] = promptgen::to_string(type);
        extra["data_label"] = reporting::data_label_for(type);
        extra["epsilon"] = ta.optimal.epsilon;
        extra["k_star"] = ta.optimal.k_star;
        extra["accuracy_at_k_star"] = ta.optimal.accuracy_at_k_star;
        extra["max_accuracy"] = ta.optimal.max_accuracy;
        crowdstats::save_curve(ta.curve, ta.curve_file, extra);
        if (log) {
            *log << "analyze: " << promptgen::to_string(type) << " N=" << values.size() << " excluded "
                 << ta.curve.meta.excluded << " k*=" << ta.optimal.k_star << " (epsilon " << ta.optimal.epsilon
                 << ") accuracy " << ta.optimal.accuracy_at_k_star << '\n';
        }
        results.push_back(std::move(ta));
    }
    return results;
}

}  // namespace woc::runner
