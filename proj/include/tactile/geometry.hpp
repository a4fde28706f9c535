#pragma once

// Planar geometry for thick polygon outlines.
//
// Coordinates follow the math convention: y grows upward, angles are
// measured counterclockwise from +x. Front ends convert from screen space.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace tactile {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double k, Point a) { return {k * a.x, k * a.y}; }
    friend constexpr bool operator==(Point, Point) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Directed edge of a Shape, running from `a` to the target vertex `b`.
struct Segment {
    Point a;
    Point b;
    std::size_t index = 0;

    double length() const { return distance(a, b); }
};

/// Raised when a shape or shape file violates an invariant. The message
/// names the violated invariant.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Closed polygon outline with a band thickness. Segment i runs from vertex
/// i to vertex (i + 1) mod n.
class Shape {
public:
    Shape(std::string name, std::vector<Point> vertices, double thickness)
        : name_(std::move(name)), vertices_(std::move(vertices)), thickness_(thickness)
    {
        if (vertices_.size() < 3) {
            throw ShapeError("shape '" + name_ + "': needs at least 3 vertices, got " +
                             std::to_string(vertices_.size()));
        }
        if (!(std::isfinite(thickness_) && thickness_ > 0.0)) {
            throw ShapeError("shape '" + name_ + "': thickness must be finite and > 0");
        }
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (!is_finite(vertices_[i])) {
                throw ShapeError("shape '" + name_ + "': vertex " + std::to_string(i) +
                                 " has a non-finite coordinate");
            }
        }
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const std::size_t j = (i + 1) % vertices_.size();
            if (vertices_[i] == vertices_[j]) {
                throw ShapeError("shape '" + name_ + "': consecutive vertices " + std::to_string(i) +
                                 " and " + std::to_string(j) + " coincide (zero-length segment)");
            }
        }
    }

    const std::string& name() const { return name_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    double thickness() const { return thickness_; }
    std::size_t size() const { return vertices_.size(); }

    Segment segment(std::size_t i) const
    {
        i %= vertices_.size();
        return {vertices_[i], vertices_[(i + 1) % vertices_.size()], i};
    }

    double perimeter() const
    {
        double total = 0.0;
        for (std::size_t i = 0; i < size(); ++i) total += segment(i).length();
        return total;
    }

private:
    std::string name_;
    std::vector<Point> vertices_;
    double thickness_;
};

/// Projection parameter of p onto the line through s, clamped to [0, 1].
inline double projection_parameter(Point p, const Segment& s)
{
    const Point ab = s.b - s.a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return 0.0;
    const double u = dot(p - s.a, ab) / len2;
    return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
}

inline Point nearest_point_on_segment(Point p, const Segment& s)
{
    const double u = projection_parameter(p, s);
    if (u == 0.0) return s.a;
    if (u == 1.0) return s.b;
    return s.a + u * (s.b - s.a);
}

inline double distance_to_segment(Point p, const Segment& s)
{
    return distance(p, nearest_point_on_segment(p, s));
}

/// Closed band of half-width t around the segment's centerline.
inline bool on_segment_band(Point p, const Segment& s, double t)
{
    return distance_to_segment(p, s) <= t;
}

/// Closed disc of radius t around the target vertex b: the half-circle cap
/// past the end of the band plus the end of the band itself.
inline bool in_target_region(Point p, const Segment& s, double t)
{
    return distance(p, s.b) <= t;
}

/// True when p lies in the outline band of any segment of the shape.
inline bool on_shape(Point p, const Shape& shape)
{
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (on_segment_band(p, shape.segment(i), shape.thickness())) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Shape files: {"name": "...", "vertices": [[x, y], ...], "thickness": t}

inline Shape shape_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw ShapeError("shape file: top level must be a JSON object");
    if (!j.contains("name") || !j["name"].is_string()) {
        throw ShapeError("shape file: missing string field 'name'");
    }
    std::string name = j["name"].get<std::string>();
    if (!j.contains("vertices") || !j["vertices"].is_array()) {
        throw ShapeError("shape '" + name + "': missing array field 'vertices'");
    }
    if (!j.contains("thickness") || !j["thickness"].is_number()) {
        throw ShapeError("shape '" + name + "': missing numeric field 'thickness'");
    }
    std::vector<Point> vertices;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ShapeError("shape '" + name + "': each vertex must be a pair [x, y] of numbers");
        }
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return Shape(std::move(name), std::move(vertices), j["thickness"].get<double>());
}

inline nlohmann::json to_json(const Shape& shape)
{
    nlohmann::json vertices = nlohmann::json::array();
    for (const Point& v : shape.vertices()) vertices.push_back({v.x, v.y});
    return {{"name", shape.name()}, {"vertices", vertices}, {"thickness", shape.thickness()}};
}

inline Shape load_shape(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open shape file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ShapeError("shape file " + path.string() + ": invalid JSON: " + e.what());
    }
    return shape_from_json(j);
}

/// Loads every *.json file directly inside `dir`, ordered by file name.
inline std::vector<Shape> load_shape_dir(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Shape> shapes;
    shapes.reserve(files.size());
    for (const auto& f : files) shapes.push_back(load_shape(f));
    return shapes;
}

}  // namespace tactile
