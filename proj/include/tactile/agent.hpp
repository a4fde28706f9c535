#pragma once

// Synthetic explorers: follow the quantized direction the guidance engine
// displays, one fixed-size step per tick.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/guidance.hpp"

namespace tactile {

struct AgentConfig {
    double step_size = 5.0;
    double noise_radius = 0.0;
    std::int64_t max_steps = 10000;
    std::uint64_t seed = 0;
    std::int64_t tick_ms = 10;  // logical time between samples
    // Timestamp for a tick; logical time (tick * tick_ms) when empty.
    std::function<std::int64_t(std::int64_t)> clock;

    void validate() const
    {
        if (!(std::isfinite(step_size) && step_size > 0.0)) throw std::invalid_argument("agent: step_size must be > 0");
        if (!(std::isfinite(noise_radius) && noise_radius >= 0.0)) {
            throw std::invalid_argument("agent: noise_radius must be >= 0");
        }
        if (max_steps < 0) throw std::invalid_argument("agent: max_steps must be >= 0");
        if (tick_ms < 0) throw std::invalid_argument("agent: tick_ms must be >= 0");
    }
};

/// One engine query of an agent run.
struct AgentSample {
    std::int64_t time_ms = 0;
    Point cursor;
    TactileState tactile;
    std::size_t segment = 0;  // current segment after the step
    std::vector<GuidanceEvent> events;
};

struct AgentRun {
    std::vector<Point> trajectory;  // cursor at each tick, starting with `start`
    std::vector<GuidanceEvent> events;
    std::int64_t laps = 0;
    std::vector<AgentSample> samples;
};

/// Uniform noise in a disc, driven by a 64-bit Mersenne twister. Doubles are
/// built from the raw 53 high bits so the stream is the same on every platform.
class DiscNoise {
public:
    explicit DiscNoise(std::uint64_t seed) : rng_(seed) {}

    Point sample(double radius)
    {
        const double r = radius * std::sqrt(unit());
        const double a = 2.0 * std::numbers::pi * unit();
        return {r * std::cos(a), r * std::sin(a)};
    }

private:
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 rng_;
};

/// Moves the cursor along the displayed direction until one lap is done or
/// the step budget runs out.
inline AgentRun greedy_follow(const Shape& shape, Point start, const AgentConfig& cfg)
{
    cfg.validate();
    if (!is_finite(start)) throw std::invalid_argument("agent: start has a non-finite coordinate");

    AgentRun run;
    GuidanceState state = reset(shape);
    DiscNoise noise(cfg.seed);
    Point p = start;
    for (std::int64_t tick = 0; tick < cfg.max_steps; ++tick) {
        const std::int64_t now = cfg.clock ? cfg.clock(tick) : tick * cfg.tick_ms;
        StepResult r = step(state, p, now);
        state = std::move(r.state);
        run.trajectory.push_back(p);
        run.events.insert(run.events.end(), r.events.begin(), r.events.end());
        run.samples.push_back({now, p, r.tactile, state.current_segment, std::move(r.events)});
        run.laps = state.laps_completed;
        if (run.laps >= 1) break;

        p = p + cfg.step_size * unit_vector(r.tactile.direction);
        if (cfg.noise_radius > 0.0) p = p + noise.sample(cfg.noise_radius);
    }
    return run;
}

}  // namespace tactile
