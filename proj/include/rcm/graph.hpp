#pragma once

#include "rcm/connection.hpp"
#include "rcm/pointprocess.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rcm {

struct WeightedEdge {
    std::uint32_t u;
    std::uint32_t v;
    double conductance;
};

/// Undirected graph with positive edge conductances in compressed
/// neighbour-list form. Parallel input edges are merged by adding their
/// conductances. Optionally carries vertex coordinates.
class WeightedGraph {
public:
    WeightedGraph() = default;
    WeightedGraph(std::size_t vertex_count, std::span<const WeightedEdge> edges, int dim = 0,
                  std::vector<double> coords = {});

    /// Unit-conductance graph of a sampled configuration.
    static WeightedGraph from_edges(const PointCloud& cloud, const EdgeList& edges);

    [[nodiscard]] std::size_t vertex_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    [[nodiscard]] std::size_t edge_count() const { return neighbors_.size() / 2; }
    [[nodiscard]] std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }
    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {neighbors_.data() + offsets_[v], degree(v)};
    }
    [[nodiscard]] std::span<const double> conductances(std::size_t v) const {
        return {conductances_.data() + offsets_[v], degree(v)};
    }
    /// c(v): total conductance at v.
    [[nodiscard]] double total_conductance(std::size_t v) const { return totals_[v]; }
    /// Conductance of edge {u, v}, 0 when absent.
    [[nodiscard]] double conductance(std::size_t u, std::size_t v) const;

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] bool has_coordinates() const { return dim_ > 0; }
    [[nodiscard]] std::span<const double> position(std::size_t v) const {
        return {coords_.data() + v * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    [[nodiscard]] const std::vector<double>& coordinates() const { return coords_; }

    /// Every edge once, u < v, ordered by (u, v).
    [[nodiscard]] std::vector<WeightedEdge> edge_list() const;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> neighbors_;
    std::vector<double> conductances_;
    std::vector<double> totals_;
    int dim_ = 0;
    std::vector<double> coords_;
};

/// Connected components with labels canonicalised to the smallest vertex
/// index in each cluster.
struct ClusterLabels {
    std::vector<std::uint32_t> label;
    /// Sizes of all clusters, descending.
    std::vector<std::size_t> sizes;
    /// size_of_label[l] is the size of the cluster labelled l (0 if l is not a label).
    std::vector<std::size_t> size_of_label;

    [[nodiscard]] std::size_t vertex_count() const { return label.size(); }
    [[nodiscard]] std::size_t cluster_count() const { return sizes.size(); }
    [[nodiscard]] std::size_t cluster_size_of(std::size_t v) const { return size_of_label[label[v]]; }
    /// Label of the largest cluster, ties to the smallest label.
    [[nodiscard]] std::uint32_t largest_label() const;
};

/// Union-find with path halving and union by size.
class DisjointSets {
public:
    explicit DisjointSets(std::size_t n);
    std::size_t find(std::size_t x);
    bool unite(std::size_t a, std::size_t b);

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

ClusterLabels labels_from_sets(DisjointSets& sets, std::size_t n);
ClusterLabels connected_components(const WeightedGraph& graph);

double largest_cluster_fraction(const ClusterLabels& labels);

struct DegreeStats {
    double mean = 0.0;
    std::size_t max = 0;
    std::vector<std::size_t> histogram;  ///< histogram[k] = number of vertices of degree k
    std::size_t vertices = 0;
};

DegreeStats degree_stats(const WeightedGraph& graph);
/// Degree statistics over the vertices flagged in `include`.
DegreeStats degree_stats(const WeightedGraph& graph, const std::vector<bool>& include);

/// Vertices at sup-distance at least `layer_fraction * half_width` from the
/// region boundary (half_width = half the smallest side).
std::vector<bool> bulk_vertices(const PointCloud& cloud, double layer_fraction = 0.1);

struct ThresholdProbe {
    double rho;
    double mean_fraction;
    double std_error;
};

struct ThresholdEstimate {
    double lo = 0.0;
    double hi = 0.0;
    double midpoint = 0.0;
    bool saturated = false;  ///< target already met at the low end of the range
    std::vector<ThresholdProbe> probes;
};

struct ThresholdOptions {
    double rho_lo = 0.05;
    double rho_hi = 20.0;
    double relative_width = 0.05;  ///< stop when (hi - lo) <= relative_width * midpoint
    int max_probes = 60;
};

/// Monte Carlo mean of the largest-cluster fraction at intensity rho in box
/// (an empty sample counts as fraction 0). Replica r uses substream r.
ThresholdProbe probe_largest_fraction(const ConnectionSpec& spec, const Region& box, double rho, int replicas,
                                      const RngStream& stream);

/// Bisection on rho of the mean largest-cluster fraction against
/// fraction_target. Every probe reuses the same replica streams.
ThresholdEstimate estimate_percolation_threshold(const ConnectionSpec& spec, const Region& box, double fraction_target,
                                                 int replicas, const RngStream& stream,
                                                 const ThresholdOptions& options = {});

}  // namespace rcm
