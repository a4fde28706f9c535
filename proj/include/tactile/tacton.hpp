#pragma once

// Pin-array Tactons: 4x4 frames, directional glyphs, blink timing and the
// binary on-shape pattern shown on the second array.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tactile {

/// 4x4 pin state, row-major, row 0 at the top. Bit (4 * row + col) is set
/// when that pin is raised.
class PinFrame {
public:
    static constexpr int kRows = 4;
    static constexpr int kCols = 4;

    constexpr PinFrame() = default;
    constexpr explicit PinFrame(std::uint16_t bits) : bits_(bits) {}

    static constexpr PinFrame all_lowered() { return PinFrame{0}; }
    static constexpr PinFrame all_raised() { return PinFrame{0xFFFF}; }

    constexpr bool at(int row, int col) const { return (bits_ >> (row * kCols + col)) & 1u; }
    constexpr void set(int row, int col, bool raised)
    {
        const auto mask = static_cast<std::uint16_t>(1u << (row * kCols + col));
        bits_ = raised ? static_cast<std::uint16_t>(bits_ | mask) : static_cast<std::uint16_t>(bits_ & ~mask);
    }
    constexpr std::uint16_t bits() const { return bits_; }
    constexpr int raised_count() const
    {
        int n = 0;
        for (std::uint16_t b = bits_; b; b &= static_cast<std::uint16_t>(b - 1)) ++n;
        return n;
    }

    friend constexpr bool operator==(PinFrame, PinFrame) = default;

private:
    std::uint16_t bits_ = 0;
};

enum class Direction8 : std::uint8_t { E, NE, N, NW, W, SW, S, SE };

inline constexpr std::array<Direction8, 8> kAllDirections = {
    Direction8::E, Direction8::NE, Direction8::N, Direction8::NW,
    Direction8::W, Direction8::SW, Direction8::S, Direction8::SE};

inline constexpr std::string_view to_string(Direction8 d)
{
    constexpr std::array<std::string_view, 8> names = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
    return names[static_cast<std::size_t>(d)];
}

inline std::optional<Direction8> parse_direction(std::string_view name)
{
    for (Direction8 d : kAllDirections) {
        if (to_string(d) == name) return d;
    }
    return std::nullopt;
}

/// Center angle of the direction's sector, degrees counterclockwise from +x.
inline constexpr double center_degrees(Direction8 d) { return 45.0 * static_cast<int>(d); }

/// Blink speeds. The wire and CLI encode them as 1, 2, 3 (slow to fast).
enum class BlinkLevel : std::uint8_t { Slow = 1, Medium = 2, Fast = 3 };

inline constexpr std::array<BlinkLevel, 3> kAllBlinkLevels = {BlinkLevel::Slow, BlinkLevel::Medium,
                                                              BlinkLevel::Fast};

inline constexpr int to_wire(BlinkLevel b) { return static_cast<int>(b); }

inline std::optional<BlinkLevel> blink_from_wire(int v)
{
    if (v < 1 || v > 3) return std::nullopt;
    return static_cast<BlinkLevel>(v);
}

inline constexpr std::string_view to_string(BlinkLevel b)
{
    switch (b) {
    case BlinkLevel::Slow: return "slow";
    case BlinkLevel::Medium: return "medium";
    case BlinkLevel::Fast: return "fast";
    }
    return "?";
}

/// Full on/off period per blink level; each phase lasts half of it.
struct BlinkPeriods {
    std::int64_t slow_ms = 1000;
    std::int64_t medium_ms = 500;
    std::int64_t fast_ms = 250;

    std::int64_t of(BlinkLevel b) const
    {
        switch (b) {
        case BlinkLevel::Slow: return slow_ms;
        case BlinkLevel::Medium: return medium_ms;
        case BlinkLevel::Fast: return fast_ms;
        }
        return slow_ms;
    }

    void validate() const
    {
        if (!(fast_ms > 0 && fast_ms < medium_ms && medium_ms < slow_ms)) {
            throw std::invalid_argument("blink periods must satisfy 0 < fast < medium < slow");
        }
    }

    friend bool operator==(const BlinkPeriods&, const BlinkPeriods&) = default;
};

struct TactileState {
    Direction8 direction = Direction8::E;
    BlinkLevel blink = BlinkLevel::Slow;
    bool on_shape = false;

    friend bool operator==(const TactileState&, const TactileState&) = default;
};

// ---------------------------------------------------------------------------
// Direction glyphs

/// One glyph per direction, indexed by Direction8.
class GlyphTable {
public:
    explicit GlyphTable(const std::array<PinFrame, 8>& glyphs) : glyphs_(glyphs) { validate(); }

    /// The table shipped in assets/glyphs.json: a bar of pins along the edge
    /// (or corner) the direction points to.
    static const GlyphTable& builtin()
    {
        static const GlyphTable table(std::array<PinFrame, 8>{
            frame_from_rows({"0001", "0011", "0011", "0001"}),  // E
            frame_from_rows({"0111", "0011", "0001", "0000"}),  // NE
            frame_from_rows({"1111", "0110", "0000", "0000"}),  // N
            frame_from_rows({"1110", "1100", "1000", "0000"}),  // NW
            frame_from_rows({"1000", "1100", "1100", "1000"}),  // W
            frame_from_rows({"0000", "1000", "1100", "1110"}),  // SW
            frame_from_rows({"0000", "0000", "0110", "1111"}),  // S
            frame_from_rows({"0000", "0001", "0011", "0111"}),  // SE
        });
        return table;
    }

    PinFrame operator[](Direction8 d) const { return glyphs_[static_cast<std::size_t>(d)]; }

    static PinFrame frame_from_rows(const std::array<std::string_view, 4>& rows)
    {
        PinFrame f;
        for (int r = 0; r < PinFrame::kRows; ++r) {
            for (int c = 0; c < PinFrame::kCols; ++c) f.set(r, c, rows[r][c] == '1');
        }
        return f;
    }

private:
    void validate() const
    {
        std::set<std::uint16_t> seen;
        for (Direction8 d : kAllDirections) {
            const PinFrame g = (*this)[d];
            if (g.raised_count() == 0) {
                throw std::invalid_argument("glyph for " + std::string(to_string(d)) + " has no raised pin");
            }
            if (!seen.insert(g.bits()).second) {
                throw std::invalid_argument("glyph for " + std::string(to_string(d)) +
                                            " duplicates another direction");
            }
        }
    }

    std::array<PinFrame, 8> glyphs_;
};

/// Parses {"N": [[0,1,1,0], ...4 rows], ...} with exactly the eight direction keys.
inline GlyphTable glyph_table_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || j.size() != 8) {
        throw std::invalid_argument("glyph table: expected an object with exactly 8 direction keys");
    }
    std::array<PinFrame, 8> glyphs{};
    for (Direction8 d : kAllDirections) {
        const std::string key(to_string(d));
        if (!j.contains(key)) throw std::invalid_argument("glyph table: missing direction " + key);
        const auto& rows = j[key];
        if (!rows.is_array() || rows.size() != 4) {
            throw std::invalid_argument("glyph table: " + key + " must have 4 rows");
        }
        PinFrame f;
        for (int r = 0; r < 4; ++r) {
            const auto& row = rows[r];
            if (!row.is_array() || row.size() != 4) {
                throw std::invalid_argument("glyph table: " + key + " row " + std::to_string(r) +
                                            " must have 4 cells");
            }
            for (int c = 0; c < 4; ++c) {
                if (!row[c].is_number_integer() || (row[c] != 0 && row[c] != 1)) {
                    throw std::invalid_argument("glyph table: " + key + " cells must be 0 or 1");
                }
                f.set(r, c, row[c] == 1);
            }
        }
        glyphs[static_cast<std::size_t>(d)] = f;
    }
    return GlyphTable(glyphs);
}

inline GlyphTable load_glyph_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open glyph table " + path.string());
    return glyph_table_from_json(nlohmann::json::parse(in));
}

inline PinFrame pattern_for_direction(Direction8 d, const GlyphTable& table = GlyphTable::builtin())
{
    return table[d];
}

struct FramePair {
    PinFrame index_frame;   // under the index finger: blinking direction glyph
    PinFrame middle_frame;  // under the middle finger: on/off shape flag

    friend bool operator==(const FramePair&, const FramePair&) = default;
};

/// Frames shown at `time_ms`. The glyph is raised during the first half of
/// each blink period and blank during the second half.
inline FramePair frame_at(const TactileState& state, std::int64_t time_ms, const BlinkPeriods& periods = {},
                          const GlyphTable& table = GlyphTable::builtin())
{
    const std::int64_t period = periods.of(state.blink);
    const bool raised_phase = 2 * (time_ms % period) < period;
    return {raised_phase ? table[state.direction] : PinFrame::all_lowered(),
            state.on_shape ? PinFrame::all_raised() : PinFrame::all_lowered()};
}

// ---------------------------------------------------------------------------
// ASCII rendering

inline constexpr std::string_view kRaisedGlyph = "●";
inline constexpr std::string_view kLoweredGlyph = "·";

/// Four lines of four pins, each line terminated by '\n'.
inline std::string render_ascii(PinFrame frame)
{
    std::string out;
    for (int r = 0; r < PinFrame::kRows; ++r) {
        for (int c = 0; c < PinFrame::kCols; ++c) out += frame.at(r, c) ? kRaisedGlyph : kLoweredGlyph;
        out += '\n';
    }
    return out;
}

/// Inverse of render_ascii. Throws std::invalid_argument on anything else.
inline PinFrame parse_ascii(std::string_view text)
{
    PinFrame frame;
    int row = 0;
    int col = 0;
    while (!text.empty()) {
        if (text.front() == '\n') {
            if (col != PinFrame::kCols) throw std::invalid_argument("pin row " + std::to_string(row) + " is short");
            ++row;
            col = 0;
            text.remove_prefix(1);
            continue;
        }
        if (row >= PinFrame::kRows || col >= PinFrame::kCols) throw std::invalid_argument("too many pins");
        if (text.starts_with(kRaisedGlyph)) {
            frame.set(row, col++, true);
            text.remove_prefix(kRaisedGlyph.size());
        } else if (text.starts_with(kLoweredGlyph)) {
            frame.set(row, col++, false);
            text.remove_prefix(kLoweredGlyph.size());
        } else {
            throw std::invalid_argument("unexpected character in pin frame");
        }
    }
    if (col != 0) {
        if (col != PinFrame::kCols) throw std::invalid_argument("last pin row is short");
        ++row;
    }
    if (row != PinFrame::kRows) throw std::invalid_argument("expected 4 pin rows");
    return frame;
}

/// Compact form used on the wire: four strings of '0'/'1'.
inline nlohmann::json frame_to_json(PinFrame frame)
{
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < PinFrame::kRows; ++r) {
        std::string row;
        for (int c = 0; c < PinFrame::kCols; ++c) row += frame.at(r, c) ? '1' : '0';
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tactile
