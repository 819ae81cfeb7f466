#include "rcm/recurrence.hpp"

#include "rcm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcm {

namespace {

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
    return s;
}

bool inside_box(std::span<const double> p, int n) {
    return std::abs(p[0]) <= n && std::abs(p[1]) <= n;
}

}  // namespace

ProjectedGraph project_long_edges(const WeightedGraph& graph) {
    if (graph.dim() != 2) throw std::invalid_argument("project_long_edges: needs a two-dimensional graph");
    ProjectedGraph out;
    out.original_vertex_count = graph.vertex_count();
    std::vector<double> coords = graph.coordinates();
    std::vector<WeightedEdge> edges;
    std::size_t next = graph.vertex_count();

    for (const auto& e : graph.edge_list()) {
        if (e.conductance != 1.0) throw std::invalid_argument("project_long_edges: input conductances must be 1");
        const auto a = graph.position(e.u);
        const auto b = graph.position(e.v);
        const double length = l1_distance(a, b);
        if (length <= 1.0) {
            edges.push_back(e);
            continue;
        }
        ++out.long_edges;
        // Equal split into ceil(L) pieces; one more piece if rounding pushes
        // a segment past length 1. The path resistance stays 1 either way.
        auto pieces = static_cast<std::size_t>(std::ceil(length));
        std::vector<double> pts;
        for (;; ++pieces) {
            pts.assign(2 * (pieces + 1), 0.0);
            for (std::size_t k = 0; k <= pieces; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(pieces);
                for (int ax = 0; ax < 2; ++ax) pts[2 * k + ax] = k == pieces ? b[ax] : a[ax] + t * (b[ax] - a[ax]);
            }
            bool ok = true;
            for (std::size_t k = 0; k < pieces && ok; ++k) {
                ok = std::abs(pts[2 * k + 2] - pts[2 * k]) + std::abs(pts[2 * k + 3] - pts[2 * k + 1]) <= 1.0;
            }
            if (ok) break;
        }
        const double c = static_cast<double>(pieces);
        std::uint32_t prev = e.u;
        for (std::size_t k = 1; k < pieces; ++k) {
            coords.push_back(pts[2 * k]);
            coords.push_back(pts[2 * k + 1]);
            const auto id = static_cast<std::uint32_t>(next++);
            edges.push_back({prev, id, c});
            prev = id;
        }
        edges.push_back({prev, e.v, c});
    }
    out.graph = WeightedGraph(next, edges, 2, std::move(coords));
    return out;
}

double max_edge_length(const WeightedGraph& graph) {
    if (!graph.has_coordinates()) throw std::invalid_argument("max_edge_length: graph has no coordinates");
    double m = 0.0;
    for (const auto& e : graph.edge_list()) m = std::max(m, l1_distance(graph.position(e.u), graph.position(e.v)));
    return m;
}

std::vector<WeightedEdge> cutset(const WeightedGraph& projected, int n, const Region& populated) {
    if (projected.dim() != 2) throw std::invalid_argument("cutset: needs a two-dimensional graph");
    if (n < 1) throw std::invalid_argument("cutset: radius must be >= 1");
    for (int ax = 0; ax < 2; ++ax) {
        if (populated.lo()[ax] > -n - 1.0 || populated.hi()[ax] < n + 1.0) {
            throw std::invalid_argument("cutset: box [-" + std::to_string(n) + ", " + std::to_string(n) +
                                        "]^2 plus margin 1 exceeds the populated region");
        }
    }
    std::vector<WeightedEdge> out;
    for (const auto& e : projected.edge_list()) {
        if (inside_box(projected.position(e.u), n) != inside_box(projected.position(e.v), n)) out.push_back(e);
    }
    return out;
}

double cutset_conductance(const std::vector<WeightedEdge>& edges) {
    double s = 0.0;
    for (const auto& e : edges) s += e.conductance;
    return s;
}

CutsetReport cutset_report(const WeightedGraph& projected, const std::vector<int>& radii, const Region& populated) {
    CutsetReport r;
    r.radii = radii;
    for (int n : radii) {
        const double c = cutset_conductance(cutset(projected, n, populated));
        r.c_n.push_back(c);
        r.normalized.push_back(n > 1 ? c / (n * std::log(static_cast<double>(n))) : 0.0);
    }
    r.nash_williams_sum = nash_williams_bound(r);
    return r;
}

double nash_williams_sum(const std::vector<double>& cut_conductances) {
    double s = 0.0;
    for (double c : cut_conductances) {
        if (c > 0.0) s += 1.0 / c;
    }
    return s;
}

double nash_williams_bound(const CutsetReport& report) {
    std::vector<int> sorted = report.radii;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k) {
        if (sorted[k] - sorted[k - 1] < 2) throw std::invalid_argument("nash_williams_bound: radii must be spaced >= 2");
    }
    return nash_williams_sum(report.c_n);
}

ScalingSummary cutset_scaling_experiment(const ConnectionSpec& spec, double rho, const std::vector<int>& radii,
                                         std::size_t replicas, const RngStream& stream,
                                         const ScalingOptions& options) {
    if (spec.dim() != 2) throw std::invalid_argument("cutset scaling: d must be 2");
    if (radii.empty() || replicas < 2) throw std::invalid_argument("cutset scaling: need radii and >= 2 replicas");
    for (int n : radii) {
        if (n < 2) throw std::invalid_argument("cutset scaling: radii must be >= 2 (n log n normalisation)");
    }
    const int r_max = *std::max_element(radii.begin(), radii.end());
    if (!(options.margin >= 1.0)) throw std::invalid_argument("cutset scaling: margin must be >= 1");
    const double f = options.window_factor;
    if (!(f == 0.0 || f >= 1.0)) throw std::invalid_argument("cutset scaling: window factor must be 0 or >= 1");

    ScalingSummary out;
    out.radii = radii;
    out.replicas = replicas;
    out.shared_window = f == 0.0;
    out.rows.resize(replicas * radii.size());
    std::vector<double> nw(replicas, 0.0);

    parallel_for(replicas, [&](std::size_t rep) {
        if (out.shared_window) {
            const Region box = Region::centered_cube(2, r_max + options.margin);
            const auto cloud = palm_condition(sample_poisson(box, rho, substream(stream, "points", rep)));
            const auto edges = sample_edges(cloud, spec, substream(stream, "edges", rep), options.sampling);
            const auto projected = project_long_edges(WeightedGraph::from_edges(cloud, edges));
            const auto report = cutset_report(projected.graph, radii, box);
            for (std::size_t k = 0; k < radii.size(); ++k) {
                out.rows[rep * radii.size() + k] = {rep, radii[k], report.c_n[k], report.normalized[k]};
            }
            nw[rep] = report.nash_williams_sum;
            return;
        }
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const Region box = Region::centered_cube(2, f * radii[k] + options.margin);
            const auto scale = substream(stream, "window", k);
            const auto cloud = palm_condition(sample_poisson(box, rho, substream(scale, "points", rep)));
            const auto edges = sample_edges(cloud, spec, substream(scale, "edges", rep), options.sampling);
            const auto projected = project_long_edges(WeightedGraph::from_edges(cloud, edges));
            const auto report = cutset_report(projected.graph, {radii[k]}, box);
            out.rows[rep * radii.size() + k] = {rep, radii[k], report.c_n[0], report.normalized[0]};
        }
    });

    const double q = options.quantile;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        std::vector<double> vals;
        for (std::size_t rep = 0; rep < replicas; ++rep) vals.push_back(out.rows[rep * radii.size() + k].normalized);
        out.quantile90.push_back(stats::quantile(vals, q));
        out.quantile90_ci.push_back(stats::bootstrap(
            vals, [q](std::span<const double> x) { return stats::quantile({x.begin(), x.end()}, q); },
            options.ci_level, options.bootstrap_resamples, substream(stream, "bootstrap", k)));
    }
    if (out.shared_window) out.mean_nash_williams = stats::mean(nw);
    return out;
}

}  // namespace rcm
