#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/geometry.hpp"

namespace birkhoff {

// Cells [theta0 + i*w, theta0 + (i+1)*w) x [p_min + j*h, p_min + (j+1)*h].
struct BitmapGeometry {
    std::size_t n_theta = 2048;
    std::size_t n_p = 2048;
    double theta0 = 0.0;
    double period = 1.0;
    double p_min = -3.0;
    double p_max = 3.0;

    bool operator==(const BitmapGeometry&) const = default;
};

// Occupancy grid on the annulus, periodic in theta and clamped in p.
class AnnulusBitmap {
public:
    explicit AnnulusBitmap(const BitmapGeometry& geometry, bool filled = false);

    const BitmapGeometry& geometry() const { return geometry_; }
    std::size_t n_theta() const { return geometry_.n_theta; }
    std::size_t n_p() const { return geometry_.n_p; }
    double cell_width() const { return geometry_.period / static_cast<double>(geometry_.n_theta); }
    double cell_height() const { return (geometry_.p_max - geometry_.p_min) / static_cast<double>(geometry_.n_p); }
    double theta_center(std::size_t i) const;
    double p_center(std::size_t j) const;
    // Cell containing (theta, p); theta is wrapped, p outside the range gives nothing.
    std::optional<std::pair<std::size_t, std::size_t>> cell_of(double theta, double p) const;

    bool get(std::size_t i, std::size_t j) const { return bits_[j * geometry_.n_theta + i] != 0; }
    void set(std::size_t i, std::size_t j, bool value = true) { bits_[j * geometry_.n_theta + i] = value ? 1 : 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    // Raw cells, index j * n_theta + i.
    const std::vector<std::uint8_t>& data() const { return bits_; }
    std::vector<std::uint8_t>& data() { return bits_; }

    AnnulusBitmap operator&(const AnnulusBitmap& other) const;
    AnnulusBitmap operator|(const AnnulusBitmap& other) const;
    AnnulusBitmap operator-(const AnnulusBitmap& other) const;
    AnnulusBitmap complement() const;
    bool operator==(const AnnulusBitmap& other) const = default;
    bool subset_of(const AnnulusBitmap& other) const;
    // Union of the (2r+1)^2 square neighbourhoods of occupied cells.
    AnnulusBitmap dilated(std::size_t radius) const;
    // Occupied cells of the 4-connected components of this set that touch the top
    // (or bottom) p row.
    AnnulusBitmap flood_from_top() const;
    AnnulusBitmap flood_from_bottom() const;

    // Chebyshev (8-neighbour) distance in cells from every cell to the nearest
    // occupied cell; 0 on occupied cells, UINT32_MAX everywhere if empty.
    std::vector<std::uint32_t> chebyshev_distance() const;

    std::vector<Point2> cell_centers() const;
    std::vector<std::pair<std::size_t, std::size_t>> cells() const;

    // Binary PBM (P4, top row = largest p) plus a JSON sidecar with the geometry
    // next to it (same name, extension .json).
    void write_pbm(const std::string& path) const;
    static AnnulusBitmap read_pbm(const std::string& path);
    // CSV of occupied cell centres, columns theta,p.
    void write_csv(const std::string& path) const;

private:
    void require_same(const AnnulusBitmap& other) const;
    AnnulusBitmap flood(std::size_t row) const;

    BitmapGeometry geometry_;
    std::vector<std::uint8_t> bits_;
};

std::string sidecar_path(const std::string& pbm_path);

}  // namespace birkhoff
