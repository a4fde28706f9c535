#pragma once

// Session protocol between the engine and interactive clients.
//
// Every message is one JSON object on one line with a "type" field.
//
//   client -> server
//     hello      {v: 1, mode: "guidance"|"pixels", condition: "..."}
//     cursor     {x, y, t}            workspace units, client-logical ms
//     answer     {label, confidence, [t]}
//     next_trial {}                   give up on the current trial
//   server -> client
//     hello          {v, blink_periods_ms: {slow, medium, fast}}
//     trial          {index, count, time_limit_ms}
//     tactile        {direction, blink, on_shape, t}     guidance mode
//     frame          {pins: ["0110", ...], t}            pixels mode
//     trial_end      {reason: answered|timeout|skipped, correct}
//     session_summary{trials: [TrialRecord...], stats}
//     error          {message}
//
// Tactile messages are only sent when the state changes; clients animate the
// blinking locally from the advertised period table. Shape geometry is never
// sent.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tactile/geometry.hpp"
#include "tactile/raster.hpp"
#include "tactile/tacton.hpp"
#include "tactile/trial.hpp"

namespace tactile {

inline constexpr int kProtocolVersion = 1;

struct GatewayConfig {
    std::vector<std::shared_ptr<const Shape>> shapes;  // trial order
    std::int64_t time_limit_ms = kDefaultTimeLimitMs;
    BlinkPeriods periods;
    RasterConfig raster;
};

/// True when the client needs a new tactile message.
inline bool tactile_change_filter(const TactileState& prev, const TactileState& next)
{
    return prev.direction != next.direction || prev.blink != next.blink || prev.on_shape != next.on_shape;
}

inline nlohmann::json error_message(std::string_view message)
{
    return {{"type", "error"}, {"message", message}};
}

inline nlohmann::json tactile_message(const TactileState& s, std::int64_t t)
{
    return {{"type", "tactile"},
            {"direction", to_string(s.direction)},
            {"blink", to_wire(s.blink)},
            {"on_shape", s.on_shape},
            {"t", t}};
}

/// Protocol state of one client. Not thread-safe: the owner serializes calls.
class Session {
public:
    explicit Session(std::shared_ptr<const GatewayConfig> config) : config_(std::move(config))
    {
        if (!config_ || config_->shapes.empty()) throw std::invalid_argument("gateway: no shapes");
        config_->periods.validate();
    }

    bool finished() const { return phase_ == Phase::Finished; }
    const std::vector<TrialRecord>& records() const { return records_; }

    /// Handles one raw line. Malformed input yields a single error reply.
    std::vector<nlohmann::json> handle_line(std::string_view line)
    {
        nlohmann::json msg;
        try {
            msg = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            return {error_message("malformed JSON")};
        }
        return handle(msg);
    }

    std::vector<nlohmann::json> handle(const nlohmann::json& msg)
    {
        if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
            return {error_message("message must be an object with a string 'type'")};
        }
        const std::string type = msg["type"].get<std::string>();
        try {
            if (type == "hello") return on_hello(msg);
            if (type == "cursor") return on_cursor(msg);
            if (type == "answer") return on_answer(msg);
            if (type == "next_trial") return on_next_trial();
        } catch (const std::invalid_argument& e) {
            return {error_message(e.what())};
        }
        return {error_message("unknown message type '" + type + "'")};
    }

private:
    enum class Phase { AwaitHello, InTrial, Finished };

    std::vector<nlohmann::json> on_hello(const nlohmann::json& msg)
    {
        if (phase_ != Phase::AwaitHello) return {error_message("session already started")};
        if (!msg.contains("v") || !msg["v"].is_number_integer() || msg["v"].get<int>() != kProtocolVersion) {
            return {error_message("unsupported protocol version (expected v=1)")};
        }
        const auto mode = parse_mode(msg.value("mode", std::string("guidance")));
        if (!mode) return {error_message("mode must be 'guidance' or 'pixels'")};
        if (msg.contains("condition") && !msg["condition"].is_string()) {
            return {error_message("condition must be a string")};
        }
        mode_ = *mode;
        condition_ = msg.value("condition", std::string{});
        phase_ = Phase::InTrial;

        const BlinkPeriods& p = config_->periods;
        std::vector<nlohmann::json> out;
        out.push_back({{"type", "hello"},
                       {"v", kProtocolVersion},
                       {"blink_periods_ms", {{"slow", p.slow_ms}, {"medium", p.medium_ms}, {"fast", p.fast_ms}}}});
        begin_trial(out);
        return out;
    }

    std::vector<nlohmann::json> on_cursor(const nlohmann::json& msg)
    {
        if (phase_ != Phase::InTrial) return {error_message("no active trial")};
        const double x = number_field(msg, "x");
        const double y = number_field(msg, "y");
        const std::int64_t t = time_field(msg, "t");

        std::vector<nlohmann::json> out;
        const std::optional<Presentation> shown = trial_->cursor({x, y}, t);
        if (!shown) {
            end_trial(out);
            return out;
        }
        if (const auto* s = std::get_if<TactileState>(&*shown)) {
            if (!last_tactile_ || tactile_change_filter(*last_tactile_, *s)) out.push_back(tactile_message(*s, t));
            last_tactile_ = *s;
        } else {
            const PinFrame f = std::get<PinFrame>(*shown);
            if (!last_frame_ || *last_frame_ != f) {
                out.push_back({{"type", "frame"}, {"pins", frame_to_json(f)}, {"t", t}});
            }
            last_frame_ = f;
        }
        return out;
    }

    std::vector<nlohmann::json> on_answer(const nlohmann::json& msg)
    {
        if (phase_ != Phase::InTrial) return {error_message("answer outside an active trial")};
        if (!msg.contains("label") || !msg["label"].is_string()) return {error_message("answer needs a string 'label'")};
        if (!msg.contains("confidence") || !msg["confidence"].is_number_integer()) {
            return {error_message("answer needs an integer 'confidence' in 1..7")};
        }
        std::optional<std::int64_t> t;
        if (msg.contains("t")) t = time_field(msg, "t");
        trial_->answer(msg["label"].get<std::string>(), msg["confidence"].get<int>(), t);
        std::vector<nlohmann::json> out;
        end_trial(out);
        return out;
    }

    std::vector<nlohmann::json> on_next_trial()
    {
        if (phase_ != Phase::InTrial) return {error_message("no active trial")};
        trial_->skip();
        std::vector<nlohmann::json> out;
        end_trial(out);
        return out;
    }

    void begin_trial(std::vector<nlohmann::json>& out)
    {
        trial_.emplace(config_->shapes[next_index_], mode_, condition_, config_->time_limit_ms, config_->raster);
        last_tactile_.reset();
        last_frame_.reset();
        out.push_back({{"type", "trial"},
                       {"index", next_index_},
                       {"count", config_->shapes.size()},
                       {"time_limit_ms", config_->time_limit_ms}});
        ++next_index_;
    }

    void end_trial(std::vector<nlohmann::json>& out)
    {
        const TrialRecord& r = trial_->record();
        records_.push_back(r);
        out.push_back({{"type", "trial_end"},
                       {"reason", to_string(*trial_->end_reason())},
                       {"correct", r.correct.value_or(false)}});
        trial_.reset();
        if (next_index_ < config_->shapes.size()) {
            begin_trial(out);
            return;
        }
        phase_ = Phase::Finished;
        nlohmann::json trials = nlohmann::json::array();
        for (const auto& rec : records_) trials.push_back(to_json(rec));
        out.push_back({{"type", "session_summary"}, {"trials", trials}, {"stats", summary_json(records_)}});
    }

    static double number_field(const nlohmann::json& msg, const char* key)
    {
        if (!msg.contains(key) || !msg[key].is_number()) {
            throw std::invalid_argument(std::string("field '") + key + "' must be a number");
        }
        const double v = msg[key].get<double>();
        if (!std::isfinite(v)) throw std::invalid_argument(std::string("field '") + key + "' must be finite");
        return v;
    }

    static std::int64_t time_field(const nlohmann::json& msg, const char* key)
    {
        if (msg.contains(key) && msg[key].is_number_integer()) return msg[key].get<std::int64_t>();
        return std::llround(number_field(msg, key));
    }

    std::shared_ptr<const GatewayConfig> config_;
    Phase phase_ = Phase::AwaitHello;
    Mode mode_ = Mode::Guidance;
    std::string condition_;
    std::size_t next_index_ = 0;
    std::optional<Trial> trial_;
    std::optional<TactileState> last_tactile_;
    std::optional<PinFrame> last_frame_;
    std::vector<TrialRecord> records_;
};

}  // namespace tactile
