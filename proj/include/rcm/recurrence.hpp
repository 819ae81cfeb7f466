#pragma once

#include "rcm/connection.hpp"
#include "rcm/graph.hpp"
#include "rcm/rng.hpp"
#include "rcm/stats.hpp"
#include "rcm/walk.hpp"

#include <cstddef>
#include <vector>

namespace rcm {

/// Graph with no edge longer than 1 in the 1-norm. Vertices
/// [0, original_vertex_count) are the input vertices; the rest are
/// subdivision points.
struct ProjectedGraph {
    WeightedGraph graph;
    std::size_t original_vertex_count = 0;
    std::size_t long_edges = 0;
};

/// Replaces every edge of 1-norm length L > 1 by ceil(L) equal collinear
/// segments, each with conductance ceil(L). Short edges keep conductance 1.
/// Requires d = 2 and unit input conductances.
ProjectedGraph project_long_edges(const WeightedGraph& graph);

/// Largest 1-norm edge length of a graph with coordinates.
double max_edge_length(const WeightedGraph& graph);

/// Edges with exactly one endpoint in the closed box [-n, n]^2. Throws when
/// [-n - 1, n + 1]^2 leaves `populated`.
std::vector<WeightedEdge> cutset(const WeightedGraph& projected, int n, const Region& populated);
double cutset_conductance(const std::vector<WeightedEdge>& edges);

struct CutsetReport {
    std::vector<int> radii;
    std::vector<double> c_n;
    std::vector<double> normalized;  ///< C_n / (n log n)
    double nash_williams_sum = 0.0;
};

/// C_n for each radius of one projected configuration.
CutsetReport cutset_report(const WeightedGraph& projected, const std::vector<int>& radii, const Region& populated);

/// Sum of 1/C_n over radii with C_n > 0. Throws if two radii are closer than 2.
double nash_williams_bound(const CutsetReport& report);

/// Sum of 1/C over the given cut-sets (conductance sums).
double nash_williams_sum(const std::vector<double>& cut_conductances);

struct ScalingRow {
    std::size_t replica = 0;
    int n = 0;
    double c_n = 0.0;
    double normalized = 0.0;
};

struct ScalingSummary {
    std::vector<int> radii;
    std::vector<ScalingRow> rows;  ///< replica-major
    std::vector<double> quantile90;  ///< of C_n / (n log n), per radius
    std::vector<stats::Interval> quantile90_ci;
    /// Mean of the per-replica sum of 1 / C_n; only defined with a shared window.
    double mean_nash_williams = 0.0;
    bool shared_window = true;
    std::size_t replicas = 0;
};

struct ScalingOptions {
    double margin = 2.0;  ///< box half-width = max radius + margin
    /// 0: one configuration per replica, shared by all radii. Otherwise each
    /// radius n gets its own configuration on [-(f n + margin), f n + margin]^2,
    /// so edges out to distance about (f - 1) n beyond the cut are present at
    /// every scale.
    double window_factor = 0.0;
    double quantile = 0.9;
    double ci_level = 0.95;
    int bootstrap_resamples = 400;
    EdgeSamplingOptions sampling;
};

/// Samples Palm configurations on [-h, h]^2, projects long edges and
/// records C_n at each radius.
ScalingSummary cutset_scaling_experiment(const ConnectionSpec& spec, double rho, const std::vector<int>& radii,
                                         std::size_t replicas, const RngStream& stream,
                                         const ScalingOptions& options = {});

}  // namespace rcm
