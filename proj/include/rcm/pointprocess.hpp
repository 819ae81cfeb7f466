#pragma once

#include "rcm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rcm {

/// Axis-aligned closed box [lo, hi] in R^d.
class Region {
public:
    Region(std::vector<double> lo, std::vector<double> hi);

    /// [-half_width, half_width]^d
    static Region centered_cube(int dim, double half_width);
    /// [0, side]^d
    static Region unit_cube(int dim, double side = 1.0);

    [[nodiscard]] int dim() const { return static_cast<int>(lo_.size()); }
    [[nodiscard]] const std::vector<double>& lo() const { return lo_; }
    [[nodiscard]] const std::vector<double>& hi() const { return hi_; }
    [[nodiscard]] double width(int axis) const { return hi_[axis] - lo_[axis]; }
    [[nodiscard]] double volume() const;
    [[nodiscard]] bool contains(std::span<const double> x) const;

    friend bool operator==(const Region&, const Region&) = default;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
};

struct Provenance {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double rho = 0.0;
};

/// Points of one sampled configuration, stored row-major (n x d).
/// Immutable after construction.
class PointCloud {
public:
    PointCloud(Region region, std::vector<double> coords, bool palm_origin, Provenance provenance);

    [[nodiscard]] int dim() const { return region_.dim(); }
    [[nodiscard]] std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim()); }
    [[nodiscard]] bool empty() const { return coords_.empty(); }
    [[nodiscard]] const Region& region() const { return region_; }
    [[nodiscard]] bool palm_origin() const { return palm_origin_; }
    [[nodiscard]] const Provenance& provenance() const { return provenance_; }
    [[nodiscard]] const std::vector<double>& coords() const { return coords_; }

    [[nodiscard]] std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
    }

    friend bool operator==(const PointCloud& a, const PointCloud& b) {
        return a.region_ == b.region_ && a.coords_ == b.coords_ && a.palm_origin_ == b.palm_origin_ &&
               a.provenance_.seed == b.provenance_.seed && a.provenance_.stream_id == b.provenance_.stream_id &&
               a.provenance_.rho == b.provenance_.rho;
    }

private:
    Region region_;
    std::vector<double> coords_;
    bool palm_origin_;
    Provenance provenance_;
};

/// Homogeneous Poisson process of intensity rho in region.
PointCloud sample_poisson(const Region& region, double rho, const RngStream& stream);

/// Prepends the origin; rejects clouds that are already conditioned.
PointCloud palm_condition(const PointCloud& cloud);

/// Reorders points lexicographically by coordinate. A Palm origin stays at
/// index 0.
PointCloud sorted_lexicographic(const PointCloud& cloud);

/// Uniform cell index over the cloud's region. Cells are half-open
/// [lo, lo + size); points on the region's upper face go to the last cell.
class CellGrid {
public:
    CellGrid(const PointCloud& cloud, double cell_size);

    [[nodiscard]] double cell_size() const { return cell_size_; }
    [[nodiscard]] std::size_t cell_count() const { return cell_start_.size() - 1; }
    [[nodiscard]] const std::vector<std::size_t>& cells_per_axis() const { return per_axis_; }

    [[nodiscard]] std::size_t cell_of(std::span<const double> x) const;
    [[nodiscard]] std::span<const std::uint32_t> points_in(std::size_t cell) const {
        return {point_ids_.data() + cell_start_[cell], cell_start_[cell + 1] - cell_start_[cell]};
    }
    [[nodiscard]] std::vector<std::size_t> cell_coords(std::size_t cell) const;
    /// Lower and upper corner of a cell, clipped to the region.
    [[nodiscard]] double cell_lo(std::size_t cell, int axis) const;
    [[nodiscard]] double cell_hi(std::size_t cell, int axis) const;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    double cell_size_;
    std::vector<std::size_t> per_axis_;
    std::vector<std::size_t> cell_start_;
    std::vector<std::uint32_t> point_ids_;
};

// Snapshot text format: "RCM1 d=.. rho=.. seed=.. stream=.. lo=a,b hi=a,b n=.. palm=0|1"
// followed by one point per line, 17 significant digits.

std::string format_double(double v);
void write_points(std::ostream& out, const PointCloud& cloud);
PointCloud read_points(std::istream& in);

}  // namespace rcm
