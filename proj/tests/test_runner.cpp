#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "test_support.hpp"
#include "woc/backends.hpp"
#include "woc/error.hpp"
#include "woc/runner.hpp"

using namespace woc;
using namespace woc::runner;
using promptgen::PromptType;

namespace {

ExperimentConfig small_config(const std::filesystem::path& out, std::size_t n,
                              std::vector<PromptType> types = {std::begin(promptgen::kAllPromptTypes),
                                                               std::end(promptgen::kAllPromptTypes)}) {
    ExperimentConfig c;
    c.run_id = "test";
    c.n_personas = n;
    c.prompt_types = std::move(types);
    c.backend.crowd = backends::CrowdModel::normal(1426, 300);
    c.backend.crowd.refusal_rate = 0.05;
    c.backend.crowd.unit_mix = 0.2;
    c.analysis.trials = 200;
    c.output_dir = out;
    return c;
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

std::size_t findings_of(const VerifyReport& r, const std::string& kind) {
    std::size_t n = 0;
    for (const auto& f : r.findings) n += f.kind == kind;
    return n;
}

}  // namespace

TEST_CASE("config parsing and validation") {
    const auto doc = nlohmann::json::parse(R"({
        "run_id": "r", "phase": "post_finetune", "prompt_types": ["base", "emotional_only"],
        "emotion_assignment": {"mode": "uniform_random", "seed": 3, "include_neutral": false},
        "n_personas": 50, "backend": {"kind": "mock", "crowd": {"distribution": {"kind": "constant", "value": 1426}}},
        "analysis": {"grid": [5, 10], "aggregator": "median", "epsilon": 0.01},
        "persona_file": "p.jsonl", "output_dir": "out"})");
    const auto c = config_from_json(doc, "/base");
    CHECK(c.phase == Phase::PostFinetune);
    CHECK(c.prompt_types == std::vector<PromptType>{PromptType::Base, PromptType::EmotionalOnly});
    CHECK(c.assignment_mode == emotions::AssignmentMode::UniformRandom);
    CHECK_FALSE(c.include_neutral);
    CHECK(c.analysis.aggregator == crowdstats::Aggregator::median());
    CHECK(c.persona_file == std::filesystem::path("/base/p.jsonl"));
    CHECK(c.output_dir == std::filesystem::path("/base/out"));
    const auto again = config_from_json(nlohmann::json::parse(to_json(c).dump()));
    CHECK(to_json(again) == to_json(c));

    auto expect_invalid = [](const char* text) {
        try {
            config_from_json(nlohmann::json::parse(text));
            FAIL("expected ConfigInvalid");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ConfigInvalid);
        }
    };
    expect_invalid(R"({"prompt_types": []})");
    expect_invalid(R"({"prompt_types": ["base", "base"]})");
    expect_invalid(R"({"prompt_types": ["all"]})");
    expect_invalid(R"({"phase": "later"})");
    expect_invalid(R"({"n_personas": 0})");
    expect_invalid(R"({"n_personas": "many"})");
    expect_invalid(R"({"backend": {"kind": "http"}})");
}

TEST_CASE("plan sizes per prompt type") {
    test::TempDir dir("plan");
    const auto plan = plan_workload(small_config(dir.path(), 100));
    std::map<PromptType, std::size_t> counts;
    std::set<std::string> hashes;
    for (const auto& s : plan) {
        ++counts[s.type];
        hashes.insert(s.prompt_hash);
    }
    CHECK(counts[PromptType::FullContext] == 100);
    CHECK(counts[PromptType::AttributesOnly] == 100);
    CHECK(counts[PromptType::EmotionalOnly] == 28 * 4);
    CHECK(counts[PromptType::Base] == 100);
    CHECK(hashes.size() == plan.size());

    const auto again = plan_workload(small_config(dir.path(), 100));
    REQUIRE(again.size() == plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) CHECK(again[i].prompt_hash == plan[i].prompt_hash);
}

TEST_CASE("persona file supplies the population") {
    test::TempDir dir("pfile");
    const auto space = persona::build_attribute_space();
    persona::write_persona_file(space, persona::sample_personas(space, 30, 8, {}), dir / "p.jsonl");
    auto c = small_config(dir / "out", 20, {PromptType::AttributesOnly});
    c.persona_file = dir / "p.jsonl";
    CHECK(plan_workload(c).size() == 20);
    c.n_personas = 31;
    CHECK_THROWS_AS(plan_workload(c), Error);
}

TEST_CASE("execute persists one record per prompt and a manifest") {
    test::TempDir dir("exec");
    const auto c = small_config(dir / "run", 100, {PromptType::AttributesOnly});
    backends::MockBackend mock(persona::build_attribute_space(), c.backend.crowd);
    const auto result = execute(c, mock);
    CHECK(result.planned == 100);
    CHECK(result.new_records == 100);
    CHECK(result.error_records == 0);
    CHECK(result.complete);
    CHECK(mock.calls() == 100);
    CHECK(count_lines(result.responses_file) == 100);
    std::ifstream in(result.manifest_file);
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["persisted"] == 100);
    CHECK(manifest["planned_by_type"]["attributes_only"] == 100);
    CHECK(manifest["ok_records"] == 100);
    CHECK(manifest["template_version"] == "v1");
    CHECK(std::filesystem::exists(dir / "run" / "personas.jsonl"));
    CHECK(verify_run(result.responses_file, c).ok());

    try {
        execute(c, mock);
        FAIL("expected ConfigInvalid without resume");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
    }
}

TEST_CASE("resume issues only the missing calls") {
    test::TempDir dir("resume");
    const auto c = small_config(dir / "run", 100, {PromptType::FullContext});
    const auto space = persona::build_attribute_space();
    backends::MockBackend first(space, c.backend.crowd);
    ExecuteOptions stop;
    stop.stop_after = 40;
    const auto partial = execute(c, first, stop);
    CHECK(first.calls() == 40);
    CHECK_FALSE(partial.complete);

    backends::MockBackend second(space, c.backend.crowd);
    ExecuteOptions resume;
    resume.resume = true;
    const auto rest = execute(c, second, resume);
    CHECK(second.calls() == 60);
    CHECK(rest.already_persisted == 40);
    CHECK(rest.complete);
    CHECK(verify_run(rest.responses_file, c).ok());

    const auto responses = test::slurp(rest.responses_file);
    backends::MockBackend third(space, c.backend.crowd);
    execute(c, third, resume);
    CHECK(third.calls() == 0);
    CHECK(test::slurp(rest.responses_file) == responses);
}

TEST_CASE("resume repairs a torn trailing record") {
    test::TempDir dir("torn");
    const auto c = small_config(dir / "run", 30, {PromptType::Base});
    const auto space = persona::build_attribute_space();
    backends::MockBackend first(space, c.backend.crowd);
    ExecuteOptions stop;
    stop.stop_after = 10;
    execute(c, first, stop);
    {
        std::ofstream out(responses_path(c), std::ios::app | std::ios::binary);
        out << R"({"prompt_hash":"abc","prompt_ty)";
    }
    backends::MockBackend second(space, c.backend.crowd);
    ExecuteOptions resume;
    resume.resume = true;
    execute(c, second, resume);
    CHECK(second.calls() == 20);
    const auto report = verify_run(responses_path(c), c);
    CHECK(report.ok());
    CHECK(report.records == 30);
}

TEST_CASE("verify flags duplicates and gaps") {
    test::TempDir dir("verify");
    const auto c = small_config(dir / "run", 28, {PromptType::FullContext, PromptType::EmotionalOnly});
    backends::MockBackend mock(persona::build_attribute_space(), c.backend.crowd);
    const auto result = execute(c, mock);
    const auto ok = verify_run(result.responses_file, c);
    CHECK(ok.ok());
    CHECK(ok.to_text().rfind("OK", 0) == 0);
    REQUIRE(ok.per_emotion.at("emotional_only").size() == 28);
    for (const auto& [emotion, n] : ok.per_emotion.at("full_context")) CHECK(n == 1);

    std::string first_line;
    {
        std::ifstream in(result.responses_file);
        std::getline(in, first_line);
    }
    {
        std::ofstream out(result.responses_file, std::ios::app);
        out << first_line << '\n';
    }
    const auto dup = verify_run(result.responses_file, c);
    CHECK(findings_of(dup, "duplicate") == 1);
    CHECK_FALSE(dup.ok());

    const auto bigger = small_config(dir / "run", 30, {PromptType::FullContext, PromptType::EmotionalOnly});
    const auto gaps = verify_run(result.responses_file, bigger);
    CHECK(findings_of(gaps, "missing") == 1);
}

TEST_CASE("verify re-extracts and compares") {
    test::TempDir dir("reextract");
    const auto c = small_config(dir / "run", 5, {PromptType::Base});
    backends::MockBackend mock(persona::build_attribute_space(), c.backend.crowd);
    const auto result = execute(c, mock);
    auto loaded = read_records(result.responses_file);
    loaded.records[0].extracted_miles = 1.0;
    {
        std::ofstream out(result.responses_file, std::ios::trunc);
        for (const auto& r : loaded.records) out << to_json(r).dump() << '\n';
        out << "not json\n";
    }
    const auto report = verify_run(result.responses_file, c);
    CHECK(findings_of(report, "extraction_mismatch") == 1);
    CHECK(findings_of(report, "malformed") == 1);
}

TEST_CASE("flaky http backend still yields a complete run") {
    std::atomic<int> n{0};
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        if (n++ % 20 == 7) {
            res.status = 503;
            return;
        }
        nlohmann::json body;
        body["choices"] = {{{"message", {{"role", "assistant"}, {"content", "About 1,430 miles."}}}}};
        res.set_content(body.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    test::TempDir dir("http");
    auto c = small_config(dir / "run", 60, {PromptType::Base});
    c.backend.kind = backends::BackendKind::Http;
    c.backend.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
    c.backend.retry.max_attempts = 5;
    backends::HttpBackend http(c.backend, [](std::chrono::milliseconds) {});
    const auto result = execute(c, http);
    server.stop();
    thread.join();

    CHECK(result.new_records == 60);
    CHECK(count_lines(result.responses_file) == 60);
    const auto records = read_records(result.responses_file).records;
    int retried = 0;
    for (const auto& r : records) {
        CHECK((r.status == "ok" || r.status == "error"));
        retried += r.attempt_count > 1;
    }
    CHECK(retried > 0);
    CHECK(verify_run(result.responses_file, c).ok());
}

TEST_CASE("analysis writes deterministic curves per prompt type") {
    test::TempDir dir("analyze");
    const auto c = small_config(dir / "run", 120, {PromptType::AttributesOnly, PromptType::Base});
    backends::MockBackend mock(persona::build_attribute_space(), c.backend.crowd);
    const auto result = execute(c, mock);
    const auto a = analyze_responses(result.responses_file, c.analysis, dir / "a");
    const auto b = analyze_responses(result.responses_file, c.analysis, dir / "b");
    REQUIRE(a.size() == 2);
    for (const auto& name : {"curve_attributes_only.csv", "curve_attributes_only.json", "curve_base.csv"}) {
        CHECK(test::slurp(dir / "a" / name) == test::slurp(dir / "b" / name));
    }
    const auto& base = a[1];
    CHECK(base.type == PromptType::Base);
    CHECK(base.curve.meta.excluded + base.curve.meta.population == 120);
    CHECK(base.curve.meta.response_level_accuracy.has_value());
    CHECK(base.curve.points.size() == 28);
    std::ifstream sidecar(dir / "a" / "curve_base.json");
    const auto meta = nlohmann::json::parse(sidecar);
    CHECK(meta["data_label"] == "Only Prompt");
    CHECK(meta["k_star"] == base.optimal.k_star);
}
