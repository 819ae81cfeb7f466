#include "rcm/walk.hpp"

#include "rcm/errors.hpp"
#include "rcm/parallel.hpp"
#include "rcm/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace rcm {

std::string to_string(SolverMethod m) { return m == SolverMethod::iterative ? "iterative" : "dense_oracle"; }

std::vector<double> transition_row(const WeightedGraph& graph, std::size_t v) {
    auto cd = graph.conductances(v);
    std::vector<double> row(cd.begin(), cd.end());
    const double total = graph.total_conductance(v);
    for (auto& p : row) p /= total;
    return row;
}

std::size_t walk_step(const WeightedGraph& graph, std::size_t v, Rng& rng) {
    auto nb = graph.neighbors(v);
    auto cd = graph.conductances(v);
    double u = rng.uniform() * graph.total_conductance(v);
    for (std::size_t k = 0; k + 1 < nb.size(); ++k) {
        u -= cd[k];
        if (u < 0.0) return nb[k];
    }
    return nb.back();
}

WalkStats simulate_walk(const WeightedGraph& graph, std::size_t start, std::size_t horizon, const RngStream& stream) {
    if (start >= graph.vertex_count()) throw std::invalid_argument("simulate_walk: start out of range");
    if (graph.degree(start) == 0) throw std::invalid_argument("simulate_walk: start vertex is isolated");
    if (horizon < 1) throw std::invalid_argument("simulate_walk: horizon must be >= 1");

    Rng rng(stream);
    WalkStats s;
    s.start = start;
    s.horizon = horizon;
    std::unordered_set<std::size_t> visited{start};
    std::size_t v = start;
    for (std::size_t t = 1; t <= horizon; ++t) {
        v = walk_step(graph, v, rng);
        visited.insert(v);
        if (v == start) {
            ++s.returns_to_start;
            if (!s.first_return_time) s.first_return_time = t;
        }
    }
    s.range = visited.size();
    return s;
}

namespace {

struct ReducedSystem {
    std::vector<std::uint32_t> vertices;  ///< free vertices in the source component
    std::vector<std::int64_t> slot;       ///< graph vertex -> free index, -1 sink/outside
    std::size_t source_slot = 0;
    bool sink_reachable = false;
};

ReducedSystem reduce(const WeightedGraph& graph, std::size_t source, const std::vector<bool>& is_sink) {
    const std::size_t n = graph.vertex_count();
    ReducedSystem sys;
    sys.slot.assign(n, -1);
    std::vector<bool> seen(n, false);
    std::vector<std::uint32_t> queue{static_cast<std::uint32_t>(source)};
    seen[source] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto v = queue[head];
        if (is_sink[v]) {
            sys.sink_reachable = true;
            continue;  // grounded: the walk stops here
        }
        sys.slot[v] = static_cast<std::int64_t>(sys.vertices.size());
        sys.vertices.push_back(v);
        for (auto w : graph.neighbors(v)) {
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    sys.source_slot = static_cast<std::size_t>(sys.slot[source]);
    return sys;
}

// y = L_ff x on the free vertices.
void apply_laplacian(const WeightedGraph& graph, const ReducedSystem& sys, const std::vector<double>& x,
                     std::vector<double>& y) {
    for (std::size_t i = 0; i < sys.vertices.size(); ++i) {
        const auto v = sys.vertices[i];
        double acc = graph.total_conductance(v) * x[i];
        auto nb = graph.neighbors(v);
        auto cd = graph.conductances(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto j = sys.slot[nb[k]];
            if (j >= 0) acc -= cd[k] * x[static_cast<std::size_t>(j)];
        }
        y[i] = acc;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Jacobi-preconditioned conjugate gradients for L_ff x = e_source.
std::vector<double> solve_cg(const WeightedGraph& graph, const ReducedSystem& sys, const SolverOptions& opt,
                             std::size_t& iterations, double& residual) {
    const std::size_t m = sys.vertices.size();
    std::vector<double> x(m, 0.0), r(m, 0.0), z(m), p(m), q(m), inv_diag(m);
    for (std::size_t i = 0; i < m; ++i) inv_diag[i] = 1.0 / graph.total_conductance(sys.vertices[i]);
    r[sys.source_slot] = 1.0;
    const double b_norm = 1.0;
    for (std::size_t i = 0; i < m; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    const auto cap = static_cast<std::size_t>(
        std::ceil(opt.iteration_cap_factor * std::sqrt(static_cast<double>(graph.vertex_count()))));
    iterations = 0;
    residual = std::sqrt(dot(r, r)) / b_norm;
    while (residual > opt.relative_tolerance) {
        if (iterations >= cap) {
            throw NumericalError("effective_resistance: conjugate gradient hit the iteration cap (" +
                                 std::to_string(cap) + ") at relative residual " + format_double(residual));
        }
        apply_laplacian(graph, sys, p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < m; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < m; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
        ++iterations;
        residual = std::sqrt(dot(r, r)) / b_norm;
    }
    // Report the true residual, not the recursively updated one.
    apply_laplacian(graph, sys, x, q);
    q[sys.source_slot] -= 1.0;
    residual = std::sqrt(dot(q, q)) / b_norm;
    if (residual > 100.0 * opt.relative_tolerance) {
        throw NumericalError("effective_resistance: true residual " + format_double(residual) +
                             " drifted above tolerance");
    }
    return x;
}

std::vector<double> solve_dense(const WeightedGraph& graph, const ReducedSystem& sys, double& residual) {
    const auto m = static_cast<Eigen::Index>(sys.vertices.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto v = sys.vertices[static_cast<std::size_t>(i)];
        a(i, i) = graph.total_conductance(v);
        auto nb = graph.neighbors(v);
        auto cd = graph.conductances(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto j = sys.slot[nb[k]];
            if (j >= 0) a(i, j) -= cd[k];
        }
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(static_cast<Eigen::Index>(sys.source_slot)) = 1.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw NumericalError("effective_resistance: dense factorisation failed");
    Eigen::VectorXd x = ldlt.solve(b);
    residual = (a * x - b).norm();
    return std::vector<double>(x.data(), x.data() + m);
}

}  // namespace

ResistanceResult effective_resistance(const WeightedGraph& graph, std::size_t source,
                                      std::span<const std::uint32_t> sinks, const SolverOptions& options) {
    const std::size_t n = graph.vertex_count();
    if (source >= n) throw std::invalid_argument("effective_resistance: source out of range");
    if (sinks.empty()) throw std::invalid_argument("effective_resistance: sink set is empty");
    std::vector<bool> is_sink(n, false);
    for (auto s : sinks) {
        if (s >= n) throw std::invalid_argument("effective_resistance: sink out of range");
        is_sink[s] = true;
    }
    if (is_sink[source]) throw std::invalid_argument("effective_resistance: source is a sink");

    ResistanceResult res;
    res.method = options.method;
    const auto sys = reduce(graph, source, is_sink);
    res.potential.assign(n, 0.0);
    if (!sys.sink_reachable) {
        res.value = std::numeric_limits<double>::infinity();
        res.connected = false;
        return res;
    }

    std::vector<double> x;
    if (options.method == SolverMethod::dense_oracle) {
        if (sys.vertices.size() > options.dense_limit) {
            throw std::invalid_argument("effective_resistance: system too large for the dense oracle");
        }
        x = solve_dense(graph, sys, res.residual);
    } else {
        x = solve_cg(graph, sys, options, res.iterations, res.residual);
    }
    for (std::size_t i = 0; i < sys.vertices.size(); ++i) res.potential[sys.vertices[i]] = x[i];
    res.value = x[sys.source_slot];
    return res;
}

double escape_probability(const WeightedGraph& graph, std::size_t source, std::span<const std::uint32_t> sinks,
                          const SolverOptions& options) {
    const auto r = effective_resistance(graph, source, sinks, options);
    if (!r.connected) return 0.0;
    return 1.0 / (graph.total_conductance(source) * r.value);
}

EscapeEstimate estimate_escape_frequency(const WeightedGraph& graph, std::size_t source,
                                         std::span<const std::uint32_t> sinks, std::size_t walks,
                                         const RngStream& stream) {
    if (source >= graph.vertex_count() || graph.degree(source) == 0) {
        throw std::invalid_argument("estimate_escape_frequency: source must be a non-isolated vertex");
    }
    std::vector<bool> is_sink(graph.vertex_count(), false);
    for (auto s : sinks) is_sink.at(s) = true;
    Rng rng(stream);
    EscapeEstimate est;
    est.walks = walks;
    for (std::size_t w = 0; w < walks; ++w) {
        std::size_t v = walk_step(graph, source, rng);
        while (v != source && !is_sink[v]) v = walk_step(graph, v, rng);
        if (v != source) ++est.escapes;
    }
    return est;
}

GrowthProfile resistance_growth_profile(const ConnectionSpec& spec, double rho, const std::vector<int>& radii,
                                        std::size_t replicas, const RngStream& stream, const GrowthOptions& options) {
    if (radii.empty()) throw std::invalid_argument("growth profile: no radii");
    if (replicas < 2) throw std::invalid_argument("growth profile: need at least 2 replicas");
    const int r_max = *std::max_element(radii.begin(), radii.end());
    if (*std::min_element(radii.begin(), radii.end()) < 1) throw std::invalid_argument("growth profile: radii must be >= 1");
    const double half = options.half_width > 0.0 ? options.half_width : 1.25 * r_max + 4.0;
    if (!(half > r_max)) throw std::invalid_argument("growth profile: box half-width must exceed the largest radius");
    const int d = spec.dim();
    const Region box = Region::centered_cube(d, half);

    GrowthProfile prof;
    prof.radii = radii;
    prof.rows.resize(replicas * radii.size());
    std::vector<std::size_t> attempts_used(replicas, 0);

    parallel_for(replicas, [&](std::size_t rep) {
        const auto rep_stream = substream(stream, "replica", rep);
        for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
            const auto cloud = palm_condition(sample_poisson(box, rho, substream(rep_stream, "points", attempt)));
            const auto edges = sample_edges(cloud, spec, substream(rep_stream, "edges", attempt), options.sampling);
            const auto graph = WeightedGraph::from_edges(cloud, edges);
            const auto labels = connected_components(graph);
            if (labels.label[0] != labels.largest_label() || graph.degree(0) == 0) continue;
            attempts_used[rep] = static_cast<std::size_t>(attempt);

            for (std::size_t k = 0; k < radii.size(); ++k) {
                auto& row = prof.rows[rep * radii.size() + k];
                row.replica = rep;
                row.radius = radii[k];
                std::vector<std::uint32_t> sinks;
                for (std::size_t v = 0; v < graph.vertex_count(); ++v) {
                    if (labels.label[v] != labels.label[0]) continue;
                    auto p = graph.position(v);
                    for (double c : p) {
                        if (std::abs(c) > radii[k]) {
                            sinks.push_back(static_cast<std::uint32_t>(v));
                            break;
                        }
                    }
                }
                if (sinks.empty()) {
                    row.dropped = true;
                    continue;
                }
                const auto r = effective_resistance(graph, 0, sinks, options.solver);
                row.r_eff = r.value;
                row.residual = r.residual;
            }
            return;
        }
        attempts_used[rep] = static_cast<std::size_t>(options.max_attempts);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            auto& row = prof.rows[rep * radii.size() + k];
            row.replica = rep;
            row.radius = radii[k];
            row.dropped = true;
        }
    });

    for (std::size_t rep = 0; rep < replicas; ++rep) {
        bool dropped = false;
        for (std::size_t k = 0; k < radii.size(); ++k) dropped = dropped || prof.rows[rep * radii.size() + k].dropped;
        if (dropped) {
            ++prof.dropped;
        } else {
            ++prof.kept;
        }
        prof.resamples += attempts_used[rep];
    }
    if (prof.kept == 0) throw StatisticalCheckError("growth profile: every replica was dropped (origin never in the largest cluster)");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        std::vector<double> vals;
        for (std::size_t rep = 0; rep < replicas; ++rep) {
            bool dropped = false;
            for (std::size_t j = 0; j < radii.size(); ++j) dropped = dropped || prof.rows[rep * radii.size() + j].dropped;
            if (!dropped) vals.push_back(prof.rows[rep * radii.size() + k].r_eff);
        }
        prof.mean.push_back(stats::mean(vals));
        prof.std_error.push_back(vals.size() > 1 ? stats::std_error(vals) : 0.0);
    }
    return prof;
}

}  // namespace rcm
