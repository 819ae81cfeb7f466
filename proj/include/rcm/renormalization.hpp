#pragma once

#include "rcm/connection.hpp"
#include "rcm/graph.hpp"
#include "rcm/pointprocess.hpp"
#include "rcm/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rcm {

/// Tiling of a cloud's region by boxes of side 2 * epsilon anchored at
/// region.lo, half-open like CellGrid. Boxes cut by the upper faces of a
/// region whose side is not a multiple of 2 * epsilon are flagged partial.
class BoxGrid {
public:
    BoxGrid(const PointCloud& cloud, const EdgeList& edges, double epsilon);

    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] int dim() const { return static_cast<int>(per_axis_.size()); }
    [[nodiscard]] std::size_t box_count() const { return box_start_.size() - 1; }
    [[nodiscard]] const std::vector<std::size_t>& boxes_per_axis() const { return per_axis_; }

    [[nodiscard]] std::vector<std::int64_t> box_index(std::size_t box) const;
    [[nodiscard]] std::size_t box_id(const std::vector<std::int64_t>& index) const;
    [[nodiscard]] std::size_t box_of_point(std::size_t point) const { return point_box_[point]; }
    [[nodiscard]] bool partial(std::size_t box) const { return partial_[box]; }

    [[nodiscard]] std::span<const std::uint32_t> points_in(std::size_t box) const {
        return {point_ids_.data() + box_start_[box], box_start_[box + 1] - box_start_[box]};
    }
    /// Sizes of the within-box clusters (edges with both ends in the box), descending.
    [[nodiscard]] const std::vector<std::size_t>& cluster_sizes(std::size_t box) const { return sizes_[box]; }
    [[nodiscard]] std::size_t largest_cluster(std::size_t box) const {
        return sizes_[box].empty() ? 0 : sizes_[box].front();
    }
    /// Largest within-box cluster, ties to the one holding the smallest point index.
    [[nodiscard]] bool in_designated_cluster(std::size_t point) const { return designated_[point]; }

private:
    double epsilon_;
    std::vector<std::size_t> per_axis_;
    std::vector<std::size_t> box_start_;
    std::vector<std::uint32_t> point_ids_;
    std::vector<std::size_t> point_box_;
    std::vector<bool> partial_;
    std::vector<std::vector<std::size_t>> sizes_;
    std::vector<bool> designated_;
};

BoxGrid partition_boxes(const PointCloud& cloud, const EdgeList& edges, double epsilon);

/// The box's largest within-box cluster has at least beta points.
bool good_box(const BoxGrid& grid, std::size_t box, int beta);

/// 1 - exp(-beta^2 / k^alpha).
double lemma_tr2_bound(int beta, double k, double alpha);

/// Upper bound on the 1-norm distance between points of two boxes whose
/// indices differ by `index_l1` in the 1-norm, rounded up to an integer.
int box_distance_bound(int index_l1, int dim, double epsilon);

struct BondRecord {
    std::uint32_t box_i = 0;
    std::uint32_t box_j = 0;
    int index_l1 = 0;  ///< 1-norm distance of box indices
    int k = 0;         ///< box_distance_bound(index_l1)
    bool both_good = false;
    bool open = false;
};

struct CoarseConfig {
    int dim = 0;
    double epsilon = 0.0;
    int beta = 0;
    double rho = 0.0;
    double alpha = 0.0;
    int max_k = 0;
    std::vector<std::size_t> boxes_per_axis;
    std::vector<bool> good;     ///< per box; partial boxes are never good
    std::vector<bool> partial;  ///< per box
    std::vector<BondRecord> bonds;  ///< ordered by (box_i, box_j)

    [[nodiscard]] std::size_t full_boxes() const;
    [[nodiscard]] std::size_t good_boxes() const;
};

/// Coarse site/bond configuration: full boxes are sites, good when their
/// largest within-box cluster reaches beta. Every pair of full boxes with
/// distance bound k <= max_k is recorded; the bond is open when both are
/// good and an edge joins their designated clusters.
CoarseConfig coarse_graph(const PointCloud& cloud, const EdgeList& edges, double epsilon, int beta, int max_k);

/// Largest cluster of good sites joined by open bonds, as a fraction of all
/// full sites.
double coarse_largest_fraction(const CoarseConfig& config);

struct FrequencyCell {
    std::string label;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double frequency = 0.0;
    double sigma = 0.0;
    double reference = 0.0;
    double lower99 = 0.0;  ///< one-sided 99% lower confidence bound
    bool pass = false;
};

enum class DominationMode { long_range, nearest_neighbor };

struct DominationParams {
    DominationMode mode = DominationMode::long_range;
    double lambda1 = 1.0;
    double mu1 = 0.5;
    double p_c = 0.5;
};

struct DominationReport {
    DominationMode mode = DominationMode::long_range;
    double site_frequency = 0.0;
    std::vector<FrequencyCell> cells;
    bool all_pass = false;
};

/// Long-range mode: site frequency vs mu1 and, per index distance m, the
/// bond frequency among good pairs vs 1 - exp(-lambda1 / m^alpha).
/// Nearest-neighbour mode: (bond frequency at m = 1) * (site frequency) vs p_c.
/// Each comparison passes when its one-sided 99% lower bound clears the reference.
DominationReport domination_report(const std::vector<CoarseConfig>& configs, const DominationParams& params);

/// Open bonds among both-good pairs at one distance (index distance m or
/// distance bound k, depending on the producer).
struct BondFrequency {
    int distance = 0;
    std::size_t trials = 0;
    std::size_t open = 0;
    [[nodiscard]] double frequency() const { return trials ? static_cast<double>(open) / static_cast<double>(trials) : 0.0; }
};
/// Per index distance m.
std::vector<BondFrequency> bond_frequencies_by_index(const std::vector<CoarseConfig>& configs);

/// Per distance bound k.
std::vector<BondFrequency> bond_frequencies_by_k(const std::vector<CoarseConfig>& configs);

/// Fraction of full boxes that are good.
double site_frequency(const std::vector<CoarseConfig>& configs);

}  // namespace rcm
