#pragma once

// Scripted participants for the recognition experiment.
//
// Script file:
//   {"condition": "unimanual", "time_limit_ms": 180000,
//    "trials": [{"shape": "square", "answer": "square", "confidence": 6, "t": 30000,
//                "cursor": [[x, y, t], ...]}, ...]}
//
// "answer"/"confidence"/"t" are omitted for a trial that runs out of time.
// Without "cursor", the cursor follows the greedy agent from vertex 0 at one
// sample per agent tick until the answer (or the time limit).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tactile/agent.hpp"
#include "tactile/geometry.hpp"
#include "tactile/trial.hpp"

namespace tactile {

struct ScriptTrial {
    std::string shape;
    std::optional<std::string> answer;
    std::optional<int> confidence;
    std::int64_t t = 0;
    std::optional<std::vector<CursorInput>> cursor;
};

struct ExperimentScript {
    std::string condition;
    std::int64_t time_limit_ms = kDefaultTimeLimitMs;
    std::vector<ScriptTrial> trials;
};

class ScriptError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline ExperimentScript script_from_json(const nlohmann::json& j)
{
    auto fail = [](const std::string& what) { throw ScriptError("experiment script: " + what); };
    if (!j.is_object()) fail("top level must be an object");
    ExperimentScript s;
    try {
        s.condition = j.value("condition", std::string{});
        s.time_limit_ms = j.value("time_limit_ms", kDefaultTimeLimitMs);
        if (s.time_limit_ms <= 0) fail("time_limit_ms must be > 0");
        if (!j.contains("trials") || !j["trials"].is_array()) fail("missing array 'trials'");
        for (const auto& tj : j["trials"]) {
            ScriptTrial t;
            t.shape = tj.at("shape").get<std::string>();
            if (tj.contains("answer") && !tj["answer"].is_null()) {
                t.answer = tj["answer"].get<std::string>();
                if (!tj.contains("confidence") || !tj.contains("t")) {
                    fail("trial for '" + t.shape + "': an answer needs 'confidence' and 't'");
                }
                t.confidence = tj["confidence"].get<int>();
                t.t = tj["t"].get<std::int64_t>();
                validate_answer(*t.answer, *t.confidence);
            }
            if (tj.contains("cursor")) {
                std::vector<CursorInput> samples;
                for (const auto& c : tj["cursor"]) {
                    if (!c.is_array() || c.size() != 3) fail("cursor samples are [x, y, t] triples");
                    samples.push_back({{c[0].get<double>(), c[1].get<double>()}, c[2].get<std::int64_t>()});
                }
                t.cursor = std::move(samples);
            }
            s.trials.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    } catch (const AnswerError& e) {
        fail(e.what());
    }
    return s;
}

inline ExperimentScript load_script(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ScriptError("experiment script: invalid JSON: " + std::string(e.what()));
    }
    return script_from_json(j);
}

inline constexpr std::int64_t kScriptAgentTickMs = 50;

/// Cursor path of the greedy agent, sampled every tick up to `until_ms`.
inline std::vector<CursorInput> agent_cursor_samples(const Shape& shape, std::int64_t until_ms)
{
    AgentConfig cfg;
    cfg.step_size = shape.thickness() / 4.0;
    cfg.tick_ms = kScriptAgentTickMs;
    cfg.max_steps = until_ms / kScriptAgentTickMs + 1;
    const AgentRun run = greedy_follow(shape, shape.vertices().front(), cfg);
    std::vector<CursorInput> out;
    out.reserve(run.samples.size());
    for (const auto& s : run.samples) out.push_back({s.cursor, s.time_ms});
    return out;
}

inline const Shape& find_shape(const std::vector<Shape>& shapes, const std::string& name)
{
    for (const auto& s : shapes) {
        if (s.name() == name) return s;
    }
    throw ScriptError("experiment script: unknown shape '" + name + "'");
}

inline std::vector<TrialRecord> run_experiment(const std::vector<Shape>& shapes, Mode mode,
                                               const ExperimentScript& script, const RasterConfig& raster = {})
{
    std::vector<TrialRecord> records;
    for (const ScriptTrial& st : script.trials) {
        const Shape& shape = find_shape(shapes, st.shape);
        const std::int64_t end = st.answer ? st.t : script.time_limit_ms;
        std::vector<TrialInput> inputs;
        const std::vector<CursorInput> samples = st.cursor ? *st.cursor : agent_cursor_samples(shape, end);
        for (const auto& c : samples) {
            if (c.t <= end) inputs.emplace_back(c);
        }
        if (st.answer) inputs.emplace_back(AnswerInput{*st.answer, *st.confidence, st.t});
        records.push_back(run_trial(shape, mode, script.condition, inputs, script.time_limit_ms, raster).record);
    }
    return records;
}

}  // namespace tactile
