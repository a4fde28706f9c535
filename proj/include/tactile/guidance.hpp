#pragma once

// Vertex-to-vertex guidance around a shape outline.
//
// Each cursor sample is turned into a TactileState: the glyph points at the
// current segment's target vertex while the cursor is inside the segment's
// band, and at the nearest point of the segment otherwise. Coming within the
// thickness of the target vertex advances to the next segment; guidance loops
// forever.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tactile/geometry.hpp"
#include "tactile/tacton.hpp"

namespace tactile {

enum class EventKind : std::uint8_t { VertexReached, LapCompleted };

inline constexpr std::string_view to_string(EventKind k)
{
    return k == EventKind::VertexReached ? "vertex_reached" : "lap_completed";
}

struct GuidanceEvent {
    EventKind kind = EventKind::VertexReached;
    std::size_t segment_index = 0;  // the segment whose target was reached
    std::int64_t time_ms = 0;

    friend bool operator==(const GuidanceEvent&, const GuidanceEvent&) = default;
};

/// Per-session engine state. Copies are cheap; the shape is shared and immutable.
struct GuidanceState {
    std::shared_ptr<const Shape> shape;
    std::size_t current_segment = 0;
    std::int64_t laps_completed = 0;
    std::int64_t advancements = 0;
    Direction8 last_direction = Direction8::E;
    std::optional<std::int64_t> last_time_ms;

    Segment segment() const { return shape->segment(current_segment); }
};

// ---------------------------------------------------------------------------
// Direction quantization

/// Sector of an angle in degrees. Sectors are [center - 22.5, center + 22.5)
/// around E = 0, NE = 45, ... counterclockwise.
inline Direction8 quantize_angle(double degrees)
{
    if (!std::isfinite(degrees)) throw std::invalid_argument("quantize_angle: non-finite angle");
    const double a = std::fmod(degrees, 360.0);
    auto k = static_cast<int>(std::lround(a / 45.0));
    if (a < 45.0 * k - 22.5) --k;
    else if (a >= 45.0 * k + 22.5) ++k;
    return static_cast<Direction8>(((k % 8) + 8) % 8);
}

/// std::nullopt for the zero vector; callers keep their last direction.
inline std::optional<Direction8> quantize_direction(Point v)
{
    if (v.x == 0.0 && v.y == 0.0) return std::nullopt;
    return quantize_angle(std::atan2(v.y, v.x) * (180.0 / std::numbers::pi));
}

/// Unit vector pointing along the center of the direction's sector.
inline Point unit_vector(Direction8 d)
{
    constexpr double h = std::numbers::sqrt2 / 2.0;
    switch (d) {
    case Direction8::E: return {1.0, 0.0};
    case Direction8::NE: return {h, h};
    case Direction8::N: return {0.0, 1.0};
    case Direction8::NW: return {-h, h};
    case Direction8::W: return {-1.0, 0.0};
    case Direction8::SW: return {-h, -h};
    case Direction8::S: return {0.0, -1.0};
    case Direction8::SE: return {h, -h};
    }
    return {1.0, 0.0};
}

/// Blink speed for distance d to the target on a segment of length L: the
/// thresholds sit at L/3 and 2L/3, faster when closer.
inline BlinkLevel blink_for_distance(double d, double segment_length)
{
    if (d > 2.0 * segment_length / 3.0) return BlinkLevel::Slow;
    if (d > segment_length / 3.0) return BlinkLevel::Medium;
    return BlinkLevel::Fast;
}

// ---------------------------------------------------------------------------
// State machine

inline GuidanceState reset(std::shared_ptr<const Shape> shape)
{
    if (!shape) throw std::invalid_argument("guidance: null shape");
    GuidanceState s;
    const Segment first = shape->segment(0);
    s.last_direction = *quantize_direction(first.b - first.a);
    s.shape = std::move(shape);
    return s;
}

inline GuidanceState reset(const Shape& shape) { return reset(std::make_shared<const Shape>(shape)); }

inline Point aim_point(Point p, const GuidanceState& state)
{
    const Segment seg = state.segment();
    if (on_segment_band(p, seg, state.shape->thickness())) return seg.b;
    return nearest_point_on_segment(p, seg);
}

struct StepResult {
    GuidanceState state;
    TactileState tactile;
    std::vector<GuidanceEvent> events;
};

inline StepResult step(const GuidanceState& state, Point p, std::int64_t time_ms)
{
    if (!is_finite(p)) throw std::invalid_argument("guidance: cursor has a non-finite coordinate");
    if (state.last_time_ms && time_ms < *state.last_time_ms) {
        throw std::invalid_argument("guidance: time went backwards");
    }

    StepResult out{state, {}, {}};
    GuidanceState& next = out.state;
    const Shape& shape = *next.shape;
    const std::size_t n = shape.size();
    const double t = shape.thickness();

    std::size_t advanced = 0;
    while (in_target_region(p, next.segment(), t)) {
        if (advanced == n) {
            throw ShapeError("guidance: shape '" + shape.name() + "' has a point inside every target region");
        }
        out.events.push_back({EventKind::VertexReached, next.current_segment, time_ms});
        if (next.current_segment == n - 1) {
            out.events.push_back({EventKind::LapCompleted, next.current_segment, time_ms});
        }
        next.current_segment = (next.current_segment + 1) % n;
        ++next.advancements;
        ++advanced;
    }
    next.laps_completed = next.advancements / static_cast<std::int64_t>(n);

    const Segment seg = next.segment();
    const Point aim = aim_point(p, next);
    const Direction8 dir = quantize_direction(aim - p).value_or(next.last_direction);
    out.tactile = {dir, blink_for_distance(distance(p, seg.b), seg.length()), on_shape(p, shape)};
    next.last_direction = dir;
    next.last_time_ms = time_ms;
    return out;
}

// ---------------------------------------------------------------------------
// Session log: one JSON object per step, one object per line.

inline nlohmann::json to_json(const GuidanceEvent& e)
{
    return {{"kind", to_string(e.kind)}, {"seg", e.segment_index}, {"t", e.time_ms}};
}

inline nlohmann::json session_log_record(std::int64_t time_ms, Point p, const TactileState& tactile,
                                         std::size_t segment, const std::vector<GuidanceEvent>& events)
{
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& e : events) ev.push_back(to_json(e));
    return {{"t", time_ms},
            {"x", p.x},
            {"y", p.y},
            {"dir", to_string(tactile.direction)},
            {"blink", to_wire(tactile.blink)},
            {"on_shape", tactile.on_shape},
            {"seg", segment},
            {"events", ev}};
}

}  // namespace tactile
