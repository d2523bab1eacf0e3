#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "woc/crowdstats.hpp"
#include "woc/emotions.hpp"
#include "woc/error.hpp"
#include "woc/finetune_config.hpp"
#include "woc/persona.hpp"
#include "woc/promptgen.hpp"
#include "woc/reporting.hpp"
#include "woc/runner.hpp"

namespace fs = std::filesystem;
using namespace woc;

namespace {

enum Exit { kOk = 0, kFindings = 1, kConfigError = 2, kIoError = 3 };

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    }
    return out;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
}

struct PersonasArgs {
    std::size_t n = 15064;
    std::uint64_t seed = 42;
    std::string rules = "default";
    bool no_rules = false;
    fs::path out = "personas.jsonl";
};

int cmd_personas_generate(const PersonasArgs& a) {
    const auto space = persona::build_attribute_space();
    std::vector<persona::ConsistencyRule> rules;
    if (!a.no_rules && a.rules != "none") {
        rules = a.rules == "default" ? persona::default_rules() : persona::load_rules(a.rules);
    }
    const auto personas = persona::sample_personas(space, a.n, a.seed, rules);
    persona::write_persona_file(space, personas, a.out);
    std::cerr << "wrote " << personas.size() << " personas to " << a.out << '\n';
    return kOk;
}

struct AssignArgs {
    fs::path personas;
    std::string mode = "balanced";
    std::uint64_t seed = 7;
    bool no_neutral = false;
    fs::path out = "assignment.jsonl";
};

int cmd_personas_assign(const AssignArgs& a) {
    const auto space = persona::build_attribute_space();
    const auto personas = persona::read_persona_file(space, a.personas);
    const auto assignment =
        emotions::assign_emotions(personas, emotions::assignment_mode_from_string(a.mode), a.seed, !a.no_neutral);
    emotions::write_assignment_file(assignment, a.out);
    std::cerr << "assigned " << assignment.entries.size() << " personas\n";
    return kOk;
}

struct PrepArgs {
    fs::path in;
    std::string template_id = "emotion-to-text";
    fs::path out = "train.jsonl";
    std::optional<fs::path> finetune_config;
};

int cmd_prep_goemotions(const PrepArgs& a) {
    const auto parsed = emotions::parse_goemotions_file(a.in, &std::cerr);
    const auto template_id = emotions::template_from_string(a.template_id);
    auto out = open_out(a.out);
    const std::size_t written = emotions::emit_training_file(parsed.records, template_id, out);
    out.close();
    if (!out) {
        throw Error(ErrorKind::IoFailure, "failed writing " + a.out.string());
    }
    std::cerr << "wrote " << written << " examples, skipped " << parsed.skipped << " malformed lines\n";
    if (a.finetune_config) {
        emotions::FinetuneConfig config;
        config.training_file = a.out.filename().string();
        config.prompt_template = std::string(emotions::to_string(template_id));
        write_json(*a.finetune_config, emotions::to_json(config));
    }
    return kOk;
}

struct RunArgs {
    fs::path config;
    bool resume = false;
    std::vector<std::string> prompt_types;
    std::optional<std::size_t> stop_after;
};

int cmd_run(const RunArgs& a) {
    auto config = runner::load_config(a.config);
    if (!a.prompt_types.empty()) {
        config.prompt_types.clear();
        for (const auto& t : a.prompt_types) {
            config.prompt_types.push_back(promptgen::prompt_type_from_string(t));
        }
        config.validate();
    }
    runner::ExecuteOptions options;
    options.resume = a.resume;
    options.stop_after = a.stop_after;
    options.log = &std::cerr;
    const auto result = runner::execute(config, options);
    std::cout << result.responses_file.string() << '\n';
    return result.complete ? kOk : kFindings;
}

struct AnalyzeArgs {
    fs::path responses;
    std::optional<fs::path> config;
    std::vector<std::size_t> grid;
    std::optional<std::size_t> trials;
    std::optional<std::string> aggregator;
    std::optional<double> epsilon;
    std::optional<std::uint64_t> seed;
    fs::path out = "analysis";
};

int cmd_analyze(const AnalyzeArgs& a) {
    runner::AnalysisConfig analysis = a.config ? runner::load_config(*a.config).analysis : runner::AnalysisConfig{};
    if (!a.grid.empty()) analysis.grid = a.grid;
    if (a.trials) analysis.trials = *a.trials;
    if (a.aggregator) analysis.aggregator = crowdstats::Aggregator::parse(*a.aggregator);
    if (a.epsilon) analysis.epsilon = *a.epsilon;
    if (a.seed) analysis.seed = *a.seed;
    const auto results = runner::analyze_responses(a.responses, analysis, a.out, &std::cerr);
    if (results.empty()) {
        throw Error(ErrorKind::EmptyInput, "no prompt type had extracted estimates");
    }
    for (const auto& r : results) {
        std::cout << r.curve_file.string() << '\n';
    }
    return kOk;
}

struct ReportArgs {
    std::vector<fs::path> curves;
    std::string format = "md";
    std::optional<fs::path> svg_dir;
    std::vector<fs::path> compare;
    double epsilon = 0.005;
    std::optional<fs::path> out;
};

int cmd_report(const ReportArgs& a) {
    const auto format = reporting::table_format_from_string(a.format);
    std::string text;
    if (!a.curves.empty()) {
        std::vector<reporting::SummaryRow> rows;
        for (const auto& path : a.curves) {
            const auto curve = crowdstats::load_curve(path);
            std::ifstream sidecar(crowdstats::sidecar_path(path));
            const auto meta = nlohmann::json::parse(sidecar, nullptr, false);
            const double epsilon = !meta.is_discarded() && meta.contains("epsilon") ? meta["epsilon"].get<double>()
                                                                                     : a.epsilon;
            const std::string label = !meta.is_discarded() && meta.contains("data_label")
                                          ? meta["data_label"].get<std::string>()
                                          : curve.meta.label;
            const auto optimal = crowdstats::find_optimal(curve, epsilon);
            rows.push_back(reporting::summarize(curve, optimal, label));
            if (a.svg_dir) {
                fs::create_directories(*a.svg_dir);
                reporting::render_curve_svg(curve, label, optimal.k_star,
                                            *a.svg_dir / (path.stem().string() + ".svg"));
            }
        }
        text += reporting::summary_table(rows, format);
    }
    if (!a.compare.empty()) {
        if (a.compare.size() != 2) {
            throw Error(ErrorKind::ConfigInvalid, "--compare takes exactly two curve files");
        }
        const auto first = crowdstats::load_curve(a.compare[0]);
        const auto second = crowdstats::load_curve(a.compare[1]);
        text += reporting::compare_runs(first, second, a.compare[0].stem().string(), a.compare[1].stem().string(),
                                        a.epsilon);
    }
    if (text.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "report needs --curves or --compare");
    }
    if (a.out) {
        auto out = open_out(*a.out);
        out << text;
    } else {
        std::cout << text;
    }
    return kOk;
}

int cmd_verify(const fs::path& responses, const fs::path& config_path) {
    const auto config = runner::load_config(config_path);
    const auto report = runner::verify_run(responses, config);
    std::cout << report.to_text();
    return report.ok() ? kOk : kFindings;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowd-estimate experiment harness"};
    app.require_subcommand(1);

    auto* personas = app.add_subcommand("personas", "Persona sampling and emotion assignment");
    personas->require_subcommand(1);
    PersonasArgs gen;
    auto* generate = personas->add_subcommand("generate", "Sample persona configurations");
    generate->add_option("--n", gen.n, "Number of personas")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed);
    generate->add_option("--rules", gen.rules, "default, none, or a rules JSON file");
    generate->add_flag("--no-rules", gen.no_rules);
    generate->add_option("--out", gen.out);
    AssignArgs assign;
    auto* assign_cmd = personas->add_subcommand("assign", "Assign one emotion per persona");
    assign_cmd->add_option("--personas", assign.personas)->required();
    assign_cmd->add_option("--mode", assign.mode, "balanced or uniform_random");
    assign_cmd->add_option("--seed", assign.seed);
    assign_cmd->add_flag("--no-neutral", assign.no_neutral);
    assign_cmd->add_option("--out", assign.out);

    auto* dataset = app.add_subcommand("dataset", "Fine-tuning data preparation");
    dataset->require_subcommand(1);
    PrepArgs prep;
    auto* prep_cmd = dataset->add_subcommand("prep-goemotions", "GoEmotions TSV to training JSONL");
    prep_cmd->add_option("--in", prep.in)->required()->check(CLI::ExistingFile);
    prep_cmd->add_option("--template", prep.template_id, "emotion-to-text or text-to-emotion");
    prep_cmd->add_option("--out", prep.out);
    prep_cmd->add_option("--finetune-config", prep.finetune_config, "Also write the LoRA config JSON here");
    fs::path finetune_out = "finetune_config.json";
    auto* ft_cmd = dataset->add_subcommand("finetune-config", "Write the default LoRA config JSON");
    ft_cmd->add_option("--out", finetune_out);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Plan and execute an experiment");
    run_cmd->add_option("--config", run.config)->required();
    run_cmd->add_flag("--resume", run.resume);
    run_cmd->add_option("--prompt-type", run.prompt_types, "Restrict to these prompt types");
    run_cmd->add_option("--stop-after", run.stop_after, "Issue at most this many new calls");

    AnalyzeArgs analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Accuracy-vs-subset-size curves");
    analyze_cmd->add_option("--responses", analyze.responses)->required();
    analyze_cmd->add_option("--config", analyze.config, "Take analysis defaults from this config");
    analyze_cmd->add_option("--grid", analyze.grid)->delimiter(',');
    analyze_cmd->add_option("--trials", analyze.trials);
    analyze_cmd->add_option("--aggregator", analyze.aggregator, "mean, median, trimmed_mean(a)");
    analyze_cmd->add_option("--epsilon", analyze.epsilon);
    analyze_cmd->add_option("--seed", analyze.seed);
    analyze_cmd->add_option("--out", analyze.out, "Output directory");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Summary tables, SVG plots and run comparisons");
    report_cmd->add_option("--curves", report.curves);
    report_cmd->add_option("--format", report.format, "md or csv");
    report_cmd->add_option("--svg-dir", report.svg_dir);
    report_cmd->add_option("--compare", report.compare)->expected(2);
    report_cmd->add_option("--epsilon", report.epsilon);
    report_cmd->add_option("--out", report.out);

    fs::path verify_responses;
    fs::path verify_config;
    auto* verify_cmd = app.add_subcommand("verify", "Check a responses file against its plan");
    verify_cmd->add_option("--responses", verify_responses)->required();
    verify_cmd->add_option("--config", verify_config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (generate->parsed()) return cmd_personas_generate(gen);
        if (assign_cmd->parsed()) return cmd_personas_assign(assign);
        if (prep_cmd->parsed()) return cmd_prep_goemotions(prep);
        if (ft_cmd->parsed()) {
            write_json(finetune_out, emotions::to_json(emotions::FinetuneConfig{}));
            return kOk;
        }
        if (run_cmd->parsed()) return cmd_run(run);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze);
        if (report_cmd->parsed()) return cmd_report(report);
        if (verify_cmd->parsed()) return cmd_verify(verify_responses, verify_config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::IoFailure ? kIoError : kConfigError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
