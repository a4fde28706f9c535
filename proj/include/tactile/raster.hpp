#pragma once

// Dark-pixel presentation: rasterize the outline band and raise the pins
// whose cells are dark in a 4x4 window centered on the cursor.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactile/geometry.hpp"
#include "tactile/tacton.hpp"

namespace tactile {

struct RasterConfig {
    double cell_size = 0.0;  // <= 0 means "use the shape thickness"
    std::size_t max_pixels = std::size_t{4096} * 4096;
};

/// Boolean image on a grid anchored at the workspace origin: pixel (col, row)
/// covers [origin + col*cell, origin + (col+1)*cell) in x and likewise in y,
/// with origin a multiple of cell_size. Row 0 is the lowest y.
class RasterImage {
public:
    RasterImage(std::int64_t origin_col, std::int64_t origin_row, std::size_t width, std::size_t height,
                double cell_size)
        : origin_col_(origin_col), origin_row_(origin_row), width_(width), height_(height),
          cell_size_(cell_size), pixels_(width * height, false)
    {
        if (width == 0 || height == 0) throw std::invalid_argument("raster: empty image");
        if (!(cell_size > 0.0)) throw std::invalid_argument("raster: cell_size must be > 0");
    }

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    double cell_size() const { return cell_size_; }
    std::int64_t origin_col() const { return origin_col_; }
    std::int64_t origin_row() const { return origin_row_; }

    bool dark(std::size_t col, std::size_t row) const { return pixels_[row * width_ + col]; }
    void set_dark(std::size_t col, std::size_t row, bool v) { pixels_[row * width_ + col] = v; }

    /// Center of the pixel at local (col, row).
    Point pixel_center(std::size_t col, std::size_t row) const
    {
        return {(static_cast<double>(origin_col_ + static_cast<std::int64_t>(col)) + 0.5) * cell_size_,
                (static_cast<double>(origin_row_ + static_cast<std::int64_t>(row)) + 0.5) * cell_size_};
    }

    /// Darkness of the grid cell containing p; cells outside the image are light.
    bool dark_at(Point p) const
    {
        const auto gc = static_cast<std::int64_t>(std::floor(p.x / cell_size_)) - origin_col_;
        const auto gr = static_cast<std::int64_t>(std::floor(p.y / cell_size_)) - origin_row_;
        if (gc < 0 || gr < 0 || gc >= static_cast<std::int64_t>(width_) || gr >= static_cast<std::int64_t>(height_)) {
            return false;
        }
        return dark(static_cast<std::size_t>(gc), static_cast<std::size_t>(gr));
    }

private:
    std::int64_t origin_col_;
    std::int64_t origin_row_;
    std::size_t width_;
    std::size_t height_;
    double cell_size_;
    std::vector<bool> pixels_;
};

/// Image covering the shape's bounding box grown by its thickness. A pixel is
/// dark iff its center is on the shape.
inline RasterImage rasterize_outline(const Shape& shape, const RasterConfig& cfg = {})
{
    const double cell = cfg.cell_size > 0.0 ? cfg.cell_size : shape.thickness();
    if (!std::isfinite(cell)) throw std::invalid_argument("raster: cell_size must be finite");

    double lo_x = shape.vertices().front().x, hi_x = lo_x;
    double lo_y = shape.vertices().front().y, hi_y = lo_y;
    for (const Point& v : shape.vertices()) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    const double t = shape.thickness();
    const double c0 = std::floor((lo_x - t) / cell);
    const double c1 = std::floor((hi_x + t) / cell);
    const double r0 = std::floor((lo_y - t) / cell);
    const double r1 = std::floor((hi_y + t) / cell);
    const double w = c1 - c0 + 1.0;
    const double h = r1 - r0 + 1.0;
    if (w * h > static_cast<double>(cfg.max_pixels)) {
        throw std::length_error("raster: image of " + std::to_string(static_cast<long long>(w)) + "x" +
                                std::to_string(static_cast<long long>(h)) + " pixels exceeds the limit of " +
                                std::to_string(cfg.max_pixels));
    }

    RasterImage img(static_cast<std::int64_t>(c0), static_cast<std::int64_t>(r0), static_cast<std::size_t>(w),
                    static_cast<std::size_t>(h), cell);
    for (std::size_t row = 0; row < img.height(); ++row) {
        for (std::size_t col = 0; col < img.width(); ++col) {
            img.set_dark(col, row, on_shape(img.pixel_center(col, row), shape));
        }
    }
    return img;
}

/// Point sampled by pin (row, col) of the window centered on p. Row 0 is the
/// top of the frame, i.e. the largest y.
inline Point window_sample_point(const RasterImage& img, Point p, int row, int col)
{
    return {p.x + (col - 1.5) * img.cell_size(), p.y + (1.5 - row) * img.cell_size()};
}

inline PinFrame sample_window(const RasterImage& img, Point p)
{
    PinFrame frame;
    for (int r = 0; r < PinFrame::kRows; ++r) {
        for (int c = 0; c < PinFrame::kCols; ++c) frame.set(r, c, img.dark_at(window_sample_point(img, p, r, c)));
    }
    return frame;
}

/// Binary PGM (P5), top row first; dark pixels 0, light 255.
inline void write_pgm(const RasterImage& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::string row_bytes(img.width(), '\0');
    for (std::size_t r = img.height(); r-- > 0;) {
        for (std::size_t c = 0; c < img.width(); ++c) row_bytes[c] = img.dark(c, r) ? '\0' : '\xff';
        out.write(row_bytes.data(), static_cast<std::streamsize>(row_bytes.size()));
    }
}

}  // namespace tactile
