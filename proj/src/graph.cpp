#include "rcm/graph.hpp"

#include "rcm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcm {

WeightedGraph::WeightedGraph(std::size_t vertex_count, std::span<const WeightedEdge> edges, int dim,
                             std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
    if (dim_ < 0 || (dim_ > 0 && coords_.size() != vertex_count * static_cast<std::size_t>(dim_)) ||
        (dim_ == 0 && !coords_.empty())) {
        throw std::invalid_argument("graph: coordinate array does not match vertex count");
    }
    if (vertex_count > 0xffffffffULL) throw std::invalid_argument("graph: too many vertices");

    // Canonicalise, sort and merge parallel edges.
    std::vector<WeightedEdge> sorted;
    sorted.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.u == e.v) throw std::invalid_argument("graph: self-loop");
        if (e.u >= vertex_count || e.v >= vertex_count) throw std::invalid_argument("graph: vertex index out of range");
        if (!(e.conductance > 0.0) || !std::isfinite(e.conductance)) {
            throw std::invalid_argument("graph: conductances must be finite and > 0");
        }
        sorted.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.conductance});
    }
    std::sort(sorted.begin(), sorted.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::vector<WeightedEdge> merged;
    merged.reserve(sorted.size());
    for (const auto& e : sorted) {
        if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
            merged.back().conductance += e.conductance;
        } else {
            merged.push_back(e);
        }
    }

    offsets_.assign(vertex_count + 1, 0);
    for (const auto& e : merged) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    neighbors_.resize(offsets_.back());
    conductances_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // Merged edges are sorted by (u, v): writing the lower-index neighbours
    // first leaves every list sorted.
    for (const auto& e : merged) {
        neighbors_[fill[e.v]] = e.u;
        conductances_[fill[e.v]++] = e.conductance;
    }
    for (const auto& e : merged) {
        neighbors_[fill[e.u]] = e.v;
        conductances_[fill[e.u]++] = e.conductance;
    }
    totals_.assign(vertex_count, 0.0);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        for (double c : conductances(v)) totals_[v] += c;
    }
}

WeightedGraph WeightedGraph::from_edges(const PointCloud& cloud, const EdgeList& edges) {
    if (edges.point_count != cloud.size()) throw std::invalid_argument("graph: edge list belongs to a different cloud");
    std::vector<WeightedEdge> list;
    list.reserve(edges.pairs.size());
    for (const auto& [i, j] : edges.pairs) list.push_back({i, j, 1.0});
    return WeightedGraph(cloud.size(), list, cloud.dim(), cloud.coords());
}

double WeightedGraph::conductance(std::size_t u, std::size_t v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), static_cast<std::uint32_t>(v));
    if (it == nb.end() || *it != v) return 0.0;
    return conductances(u)[static_cast<std::size_t>(it - nb.begin())];
}

std::vector<WeightedEdge> WeightedGraph::edge_list() const {
    std::vector<WeightedEdge> out;
    out.reserve(edge_count());
    for (std::size_t u = 0; u < vertex_count(); ++u) {
        auto nb = neighbors(u);
        auto cd = conductances(u);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] > u) out.push_back({static_cast<std::uint32_t>(u), nb[k], cd[k]});
        }
    }
    return out;
}

DisjointSets::DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
}

std::size_t DisjointSets::find(std::size_t x) {
    while (parent_[x] != x) {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool DisjointSets::unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
}

ClusterLabels labels_from_sets(DisjointSets& sets, std::size_t n) {
    ClusterLabels out;
    out.label.resize(n);
    out.size_of_label.assign(n, 0);
    std::vector<std::uint32_t> root_label(n, 0xffffffffu);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t r = sets.find(v);
        if (root_label[r] == 0xffffffffu) root_label[r] = static_cast<std::uint32_t>(v);  // first visit = smallest index
        out.label[v] = root_label[r];
        ++out.size_of_label[out.label[v]];
    }
    for (std::size_t l = 0; l < n; ++l) {
        if (out.size_of_label[l] > 0) out.sizes.push_back(out.size_of_label[l]);
    }
    std::sort(out.sizes.begin(), out.sizes.end(), std::greater<>());
    return out;
}

ClusterLabels connected_components(const WeightedGraph& graph) {
    const std::size_t n = graph.vertex_count();
    DisjointSets sets(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (auto v : graph.neighbors(u)) {
            if (v > u) sets.unite(u, v);
        }
    }
    return labels_from_sets(sets, n);
}

std::uint32_t ClusterLabels::largest_label() const {
    std::uint32_t best = 0;
    for (std::size_t l = 0; l < size_of_label.size(); ++l) {
        if (size_of_label[l] > size_of_label[best]) best = static_cast<std::uint32_t>(l);
    }
    return best;
}

double largest_cluster_fraction(const ClusterLabels& labels) {
    if (labels.vertex_count() == 0) throw std::invalid_argument("largest_cluster_fraction: empty graph");
    return static_cast<double>(labels.sizes.front()) / static_cast<double>(labels.vertex_count());
}

DegreeStats degree_stats(const WeightedGraph& graph) {
    return degree_stats(graph, std::vector<bool>(graph.vertex_count(), true));
}

DegreeStats degree_stats(const WeightedGraph& graph, const std::vector<bool>& include) {
    if (include.size() != graph.vertex_count()) throw std::invalid_argument("degree_stats: mask size mismatch");
    DegreeStats s;
    std::size_t total = 0;
    for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
        if (!include[v]) continue;
        const std::size_t k = graph.degree(v);
        if (k >= s.histogram.size()) s.histogram.resize(k + 1, 0);
        ++s.histogram[k];
        s.max = std::max(s.max, k);
        total += k;
        ++s.vertices;
    }
    s.mean = s.vertices ? static_cast<double>(total) / static_cast<double>(s.vertices) : 0.0;
    return s;
}

std::vector<bool> bulk_vertices(const PointCloud& cloud, double layer_fraction) {
    const auto& region = cloud.region();
    double half = std::numeric_limits<double>::infinity();
    for (int a = 0; a < region.dim(); ++a) half = std::min(half, 0.5 * region.width(a));
    const double layer = layer_fraction * half;
    std::vector<bool> keep(cloud.size(), true);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (int a = 0; a < region.dim(); ++a) {
            if (p[a] - region.lo()[a] < layer || region.hi()[a] - p[a] < layer) {
                keep[i] = false;
                break;
            }
        }
    }
    return keep;
}

ThresholdProbe probe_largest_fraction(const ConnectionSpec& spec, const Region& box, double rho, int replicas,
                                      const RngStream& stream) {
    if (replicas < 2) throw std::invalid_argument("threshold: need at least 2 replicas per probe");
    std::vector<double> fractions(replicas, 0.0);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t r) {
        const auto cloud = sample_poisson(box, rho, substream(stream, "points", r));
        if (cloud.empty()) return;
        const auto edges = sample_edges(cloud, spec, substream(stream, "edges", r));
        fractions[r] = largest_cluster_fraction(connected_components(WeightedGraph::from_edges(cloud, edges)));
    });
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= replicas;
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    var /= (replicas - 1);
    return {rho, mean, std::sqrt(var / replicas)};
}

ThresholdEstimate estimate_percolation_threshold(const ConnectionSpec& spec, const Region& box, double fraction_target,
                                                 int replicas, const RngStream& stream,
                                                 const ThresholdOptions& options) {
    if (!(fraction_target > 0.0 && fraction_target < 1.0)) {
        throw std::invalid_argument("threshold: fraction_target must lie in (0, 1)");
    }
    if (!(options.rho_lo > 0.0 && options.rho_hi > options.rho_lo)) {
        throw std::invalid_argument("threshold: need 0 < rho_lo < rho_hi");
    }
    ThresholdEstimate est;
    auto probe = [&](double rho) {
        auto p = probe_largest_fraction(spec, box, rho, replicas, stream);
        est.probes.push_back(p);
        return p.mean_fraction;
    };

    double lo = options.rho_lo;
    double hi = options.rho_hi;
    if (probe(lo) >= fraction_target) {
        est.lo = est.hi = est.midpoint = lo;
        est.saturated = true;
        return est;
    }
    if (probe(hi) < fraction_target) {
        throw std::invalid_argument("threshold: target fraction not reached at rho_hi (range does not bracket)");
    }
    while (hi - lo > options.relative_width * 0.5 * (lo + hi) && static_cast<int>(est.probes.size()) < options.max_probes) {
        // Geometric midpoint: the bracket may span orders of magnitude.
        const double mid = std::sqrt(lo * hi);
        if (probe(mid) >= fraction_target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    est.lo = lo;
    est.hi = hi;
    est.midpoint = 0.5 * (lo + hi);
    return est;
}

}  // namespace rcm
