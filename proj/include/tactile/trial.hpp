#pragma once

// Timed shape-recognition trials: drive a presentation engine over cursor
// samples, close on an answer or on the time limit, and summarize results.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tactile/geometry.hpp"
#include "tactile/guidance.hpp"
#include "tactile/raster.hpp"
#include "tactile/stats.hpp"
#include "tactile/tacton.hpp"

namespace tactile {

inline constexpr std::int64_t kDefaultTimeLimitMs = 180000;

enum class Mode { Guidance, Pixels };

inline constexpr std::string_view to_string(Mode m) { return m == Mode::Guidance ? "guidance" : "pixels"; }

inline std::optional<Mode> parse_mode(std::string_view s)
{
    if (s == "guidance") return Mode::Guidance;
    if (s == "pixels") return Mode::Pixels;
    return std::nullopt;
}

struct TrialRecord {
    std::string shape_id;
    Mode mode = Mode::Guidance;
    std::string condition;
    std::optional<std::string> answer;
    std::optional<bool> correct;
    std::int64_t response_time_ms = 0;
    std::optional<int> confidence;
    bool timed_out = false;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Thrown for answers whose confidence is outside 1..7 or whose label is empty.
class AnswerError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void validate_answer(std::string_view label, int confidence)
{
    if (confidence < 1 || confidence > 7) {
        throw AnswerError("confidence must be in 1..7, got " + std::to_string(confidence));
    }
    if (std::all_of(label.begin(), label.end(), [](unsigned char c) { return std::isspace(c); })) {
        throw AnswerError("answer label is empty");
    }
}

/// Case-insensitive comparison, ignoring surrounding whitespace.
inline bool labels_match(std::string_view answer, std::string_view shape_id)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    answer = trim(answer);
    shape_id = trim(shape_id);
    return answer.size() == shape_id.size() &&
           std::equal(answer.begin(), answer.end(), shape_id.begin(), [](char a, char b) {
               return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
           });
}

/// What the participant feels for one cursor sample: a tactile state in
/// guidance mode, the raw 4x4 window in pixels mode.
using Presentation = std::variant<TactileState, PinFrame>;

enum class EndReason { Answered, Timeout, Skipped };

inline constexpr std::string_view to_string(EndReason r)
{
    switch (r) {
    case EndReason::Answered: return "answered";
    case EndReason::Timeout: return "timeout";
    case EndReason::Skipped: return "skipped";
    }
    return "?";
}

/// One running trial. Times are absolute; the trial clock starts at the
/// first timestamped input unless start() is called first.
class Trial {
public:
    Trial(std::shared_ptr<const Shape> shape, Mode mode, std::string condition,
          std::int64_t time_limit_ms = kDefaultTimeLimitMs, const RasterConfig& raster = {})
        : shape_(std::move(shape)), mode_(mode), time_limit_ms_(time_limit_ms)
    {
        if (!shape_) throw std::invalid_argument("trial: null shape");
        if (time_limit_ms_ <= 0) throw std::invalid_argument("trial: time limit must be > 0");
        record_.shape_id = shape_->name();
        record_.mode = mode;
        record_.condition = std::move(condition);
        if (mode_ == Mode::Guidance) {
            guidance_ = reset(shape_);
        } else {
            raster_ = std::make_shared<const RasterImage>(rasterize_outline(*shape_, raster));
        }
    }

    void start(std::int64_t t)
    {
        if (!start_ms_) start_ms_ = t;
    }

    bool closed() const { return end_.has_value(); }
    std::optional<EndReason> end_reason() const { return end_; }
    const TrialRecord& record() const { return record_; }
    const Shape& shape() const { return *shape_; }
    std::int64_t time_limit_ms() const { return time_limit_ms_; }
    const std::optional<GuidanceState>& guidance() const { return guidance_; }

    /// Presentation for the sample, or nullopt once the trial is closed
    /// (including when this sample is past the time limit).
    std::optional<Presentation> cursor(Point p, std::int64_t t)
    {
        if (closed()) return std::nullopt;
        const std::int64_t elapsed = t - start_ms_.value_or(t);
        if (elapsed > time_limit_ms_) {
            close_timeout();
            return std::nullopt;
        }
        if (mode_ == Mode::Guidance) {
            StepResult r = step(*guidance_, p, t);
            start(t);
            guidance_ = std::move(r.state);
            last_events_ = std::move(r.events);
            last_elapsed_ = std::max(last_elapsed_, elapsed);
            return r.tactile;
        }
        if (!is_finite(p)) throw std::invalid_argument("trial: cursor has a non-finite coordinate");
        start(t);
        last_events_.clear();
        last_elapsed_ = std::max(last_elapsed_, elapsed);
        return sample_window(*raster_, p);
    }

    /// Guidance events produced by the most recent cursor sample.
    const std::vector<GuidanceEvent>& last_events() const { return last_events_; }

    /// Closes the trial with an answer. Without a timestamp the answer is
    /// taken to arrive with the latest cursor sample. Throws AnswerError
    /// before any state change when the answer is invalid.
    void answer(const std::string& label, int confidence, std::optional<std::int64_t> t = std::nullopt)
    {
        if (closed()) throw std::logic_error("trial: answer after the trial closed");
        validate_answer(label, confidence);
        std::int64_t elapsed = last_elapsed_;
        if (t) {
            start(*t);
            elapsed = std::max<std::int64_t>(0, *t - *start_ms_);
        }
        if (elapsed > time_limit_ms_) {
            close_timeout();
            return;
        }
        record_.answer = label;
        record_.confidence = confidence;
        record_.correct = labels_match(label, shape_->name());
        record_.response_time_ms = elapsed;
        record_.timed_out = false;
        end_ = EndReason::Answered;
    }

    /// Gives up on the trial without an answer.
    void skip()
    {
        if (closed()) return;
        record_.response_time_ms = last_elapsed_;
        end_ = EndReason::Skipped;
    }

    /// End of input: an open trial times out.
    void finish()
    {
        if (!closed()) close_timeout();
    }

private:
    void close_timeout()
    {
        record_.answer.reset();
        record_.confidence.reset();
        record_.correct.reset();
        record_.response_time_ms = time_limit_ms_;
        record_.timed_out = true;
        end_ = EndReason::Timeout;
    }

    std::shared_ptr<const Shape> shape_;
    Mode mode_;
    std::int64_t time_limit_ms_;
    TrialRecord record_;
    std::optional<GuidanceState> guidance_;
    std::shared_ptr<const RasterImage> raster_;
    std::optional<std::int64_t> start_ms_;
    std::int64_t last_elapsed_ = 0;
    std::optional<EndReason> end_;
    std::vector<GuidanceEvent> last_events_;
};

struct CursorInput {
    Point p;
    std::int64_t t = 0;
};

struct AnswerInput {
    std::string label;
    int confidence = 0;
    std::int64_t t = 0;
};

using TrialInput = std::variant<CursorInput, AnswerInput>;

struct TrialRun {
    TrialRecord record;
    std::vector<Presentation> outputs;  // one per cursor sample consumed
};

/// Headless trial: times in `inputs` are relative to the trial start.
/// Inputs after the trial closes are ignored.
inline TrialRun run_trial(const Shape& shape, Mode mode, std::string condition, std::span<const TrialInput> inputs,
                          std::int64_t time_limit_ms = kDefaultTimeLimitMs, const RasterConfig& raster = {})
{
    Trial trial(std::make_shared<const Shape>(shape), mode, std::move(condition), time_limit_ms, raster);
    trial.start(0);
    TrialRun run;
    for (const TrialInput& in : inputs) {
        if (trial.closed()) break;
        if (const auto* c = std::get_if<CursorInput>(&in)) {
            if (auto out = trial.cursor(c->p, c->t)) run.outputs.push_back(*out);
        } else {
            const auto& a = std::get<AnswerInput>(in);
            trial.answer(a.label, a.confidence, a.t);
        }
    }
    trial.finish();
    run.record = trial.record();
    return run;
}

// ---------------------------------------------------------------------------
// Error counts

struct ErrorFraction {
    std::size_t errors = 0;
    std::size_t total = 0;

    std::string to_string() const { return std::to_string(errors) + "/" + std::to_string(total); }
    friend bool operator==(const ErrorFraction&, const ErrorFraction&) = default;
};

/// Timeouts and unanswered trials count as errors.
inline ErrorFraction error_fraction(std::span<const TrialRecord> trials)
{
    if (trials.empty()) throw std::invalid_argument("error_fraction: no trials");
    ErrorFraction f{0, trials.size()};
    for (const auto& t : trials) {
        if (t.timed_out || !t.correct.value_or(false)) ++f.errors;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Trial log: one JSON object per line

inline nlohmann::json to_json(const TrialRecord& r)
{
    nlohmann::json j;
    j["shape_id"] = r.shape_id;
    j["mode"] = to_string(r.mode);
    j["condition"] = r.condition;
    j["answer"] = r.answer ? nlohmann::json(*r.answer) : nlohmann::json(nullptr);
    j["correct"] = r.correct ? nlohmann::json(*r.correct) : nlohmann::json(nullptr);
    j["response_time_ms"] = r.response_time_ms;
    j["confidence"] = r.confidence ? nlohmann::json(*r.confidence) : nlohmann::json(nullptr);
    j["timed_out"] = r.timed_out;
    return j;
}

inline TrialRecord trial_record_from_json(const nlohmann::json& j)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("trial record: " + what); };
    if (!j.is_object()) fail("not an object");
    TrialRecord r;
    try {
        r.shape_id = j.at("shape_id").get<std::string>();
        const auto mode = parse_mode(j.at("mode").get<std::string>());
        if (!mode) fail("unknown mode");
        r.mode = *mode;
        r.condition = j.value("condition", std::string{});
        if (j.contains("answer") && !j["answer"].is_null()) r.answer = j["answer"].get<std::string>();
        if (j.contains("correct") && !j["correct"].is_null()) r.correct = j["correct"].get<bool>();
        r.response_time_ms = j.at("response_time_ms").get<std::int64_t>();
        if (j.contains("confidence") && !j["confidence"].is_null()) r.confidence = j["confidence"].get<int>();
        r.timed_out = j.at("timed_out").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    if (r.timed_out && r.answer) fail("timed out trial carries an answer");
    if (r.answer.has_value() != r.confidence.has_value()) fail("confidence must be present iff an answer is");
    if (r.confidence && (*r.confidence < 1 || *r.confidence > 7)) fail("confidence outside 1..7");
    if (r.response_time_ms < 0) fail("negative response time");
    return r;
}

inline std::vector<TrialRecord> read_trial_log(std::istream& in)
{
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(trial_record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline std::vector<TrialRecord> read_trial_log(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trial log " + path.string());
    try {
        return read_trial_log(in);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

inline void write_trial_log(std::ostream& out, std::span<const TrialRecord> trials)
{
    for (const auto& t : trials) out << to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Two-condition report

struct ConditionSummary {
    ErrorFraction errors;
    SummaryStats time_s;
    std::optional<SummaryStats> confidence;  // absent when nobody answered
    std::vector<double> times;
    std::vector<double> confidences;
};

inline ConditionSummary summarize_condition(std::span<const TrialRecord> trials)
{
    ConditionSummary s;
    s.errors = error_fraction(trials);
    for (const auto& t : trials) {
        s.times.push_back(static_cast<double>(t.response_time_ms) / 1000.0);
        if (t.confidence) s.confidences.push_back(*t.confidence);
    }
    s.time_s = summarize(s.times);
    if (!s.confidences.empty()) s.confidence = summarize(s.confidences);
    return s;
}

inline nlohmann::json to_json(const SummaryStats& s)
{
    return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd ? nlohmann::json(*s.sd) : nlohmann::json(nullptr)}};
}

inline nlohmann::json summary_json(std::span<const TrialRecord> trials)
{
    if (trials.empty()) return {{"errors", 0}, {"total", 0}};
    const ConditionSummary s = summarize_condition(trials);
    nlohmann::json j = {{"errors", s.errors.errors}, {"total", s.errors.total}, {"time_s", to_json(s.time_s)}};
    j["confidence"] = s.confidence ? to_json(*s.confidence) : nlohmann::json(nullptr);
    return j;
}

/// Plain-text comparison of two conditions. Times are response times of all
/// trials (timeouts at the limit); confidences come from answered trials.
inline std::string comparison_report(std::span<const TrialRecord> a, std::span<const TrialRecord> b)
{
    const ConditionSummary sa = summarize_condition(a);
    const ConditionSummary sb = summarize_condition(b);
    auto label = [](std::span<const TrialRecord> t, const char* fallback) {
        std::vector<std::string> names;
        for (const auto& r : t) {
            if (!r.condition.empty()) names.push_back(r.condition);
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        if (names.empty()) return std::string(fallback);
        std::string joined = names.front();
        for (std::size_t i = 1; i < names.size(); ++i) joined += "+" + names[i];
        return joined;
    };

    std::ostringstream out;
    out << "conditions: " << label(a, "a") << " vs " << label(b, "b") << '\n';
    out << "errors: " << sa.errors.to_string() << " vs " << sb.errors.to_string() << '\n';
    out << "time: " << format_mean_sd(sa.time_s, "s") << " vs " << format_mean_sd(sb.time_s, "s") << '\n';
    out << "time test: " << format_wilcoxon(wilcoxon_rank_sum(sa.times, sb.times)) << '\n';
    auto conf = [](const std::optional<SummaryStats>& s) {
        return s ? format_mean_sd(*s, "", "/7") : std::string("n/a");
    };
    out << "confidence: " << conf(sa.confidence) << " vs " << conf(sb.confidence) << '\n';
    if (sa.confidence && sb.confidence) {
        out << "confidence test: " << format_wilcoxon(wilcoxon_rank_sum(sa.confidences, sb.confidences)) << '\n';
    } else {
        out << "confidence test: n/a\n";
    }
    return out.str();
}

}  // namespace tactile
