// Acceptance runner: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include "rcm/cli.hpp"
#include "rcm/connection.hpp"
#include "rcm/graph.hpp"
#include "rcm/lrp.hpp"
#include "rcm/pointprocess.hpp"
#include "rcm/recurrence.hpp"
#include "rcm/renormalization.hpp"
#include "rcm/stats.hpp"
#include "rcm/walk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rcm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double x, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << x;
    return s.str();
}

SolverOptions dense_solver(std::size_t limit = 5000) {
    SolverOptions o;
    o.method = SolverMethod::dense_oracle;
    o.dense_limit = limit;
    return o;
}

// Random spanning tree plus extra edges, conductances in [0.2, 2.2].
std::vector<WeightedEdge> random_connected(std::size_t n, Rng& rng, double extra) {
    std::vector<WeightedEdge> e;
    for (std::uint32_t v = 1; v < n; ++v) e.push_back({static_cast<std::uint32_t>(rng.index(v)), v, 0.2 + 2.0 * rng.uniform()});
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            if (rng.bernoulli(extra)) e.push_back({i, j, 0.2 + 2.0 * rng.uniform()});
        }
    }
    return e;
}

double sup_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------

Outcome kernel_exactness() {
    Outcome o;
    const double unit = 1.0 - std::exp(-1.0);
    double worst = 0.0;
    for (double alpha : {2.5, 3.0, 4.0, 4.5, 6.0, 10.0}) {
        const auto s2 = ConnectionSpec::polynomial_tail(2, alpha);
        const double a[] = {1.0, 0.0}, b[] = {0.5, -0.5}, c[] = {0.0, -1.0};
        for (auto* x : {a, b, c}) worst = std::max(worst, std::abs(eval_connection(s2, {x, 2}) - unit));
        const double z[] = {0.0, 0.0};
        o.require(eval_connection(s2, z) == 1.0, "g(0) = 1");
        const auto s3 = ConnectionSpec::polynomial_tail(3, alpha + 1.0);
        const double e[] = {0.25, 0.25, 0.5};
        worst = std::max(worst, std::abs(eval_connection(s3, e) - unit));
        const auto s2e = ConnectionSpec::polynomial_tail(2, alpha, Norm::two);
        const double f[] = {0.6, 0.8};
        worst = std::max(worst, std::abs(eval_connection(s2e, f) - unit));
        const auto tr = ConnectionSpec::truncated(2, alpha, 1.5);
        worst = std::max(worst, std::abs(eval_connection(tr, a) - unit));
        const double far[] = {1.0, 0.6};
        o.require(eval_connection(tr, far) == 0.0, "truncated kernel vanishes beyond M");
    }
    o.require(worst <= 1e-12, "unit-distance value within 1e-12");
    o.note("max |g - (1 - 1/e)| = " + num(worst, 3));

    const auto blob = ConnectionSpec::blob(2, 1.0);
    const double in[] = {0.5, 0.5}, edge[] = {1.0, 0.0}, out[] = {2.0, 0.0}, out2[] = {0.6, 0.6};
    o.require(eval_connection(blob, in) == 1.0 && eval_connection(blob, edge) == 1.0, "blob inside");
    o.require(eval_connection(blob, out) == 0.0 && eval_connection(blob, out2) == 0.0, "blob outside");

    const std::vector<ConnectionSpec> specs{ConnectionSpec::polynomial_tail(2, 3.0), ConnectionSpec::polynomial_tail(2, 4.5),
                                            ConnectionSpec::truncated(2, 4.0, 2.0), ConnectionSpec::blob(2, 1.3),
                                            ConnectionSpec::polynomial_tail(2, 4.0, Norm::two)};
    Rng rng(substream({1, 0}, "kernel", 0));
    bool sym = true, range = true;
    for (int t = 0; t < 10000; ++t) {
        const double x[] = {6.0 * rng.uniform() - 3.0, 6.0 * rng.uniform() - 3.0};
        const double mx[] = {-x[0], -x[1]};
        for (const auto& s : specs) {
            const double g = eval_connection(s, x);
            sym = sym && g == eval_connection(s, mx);
            range = range && g >= 0.0 && g <= 1.0;
        }
    }
    o.require(sym, "symmetry on 1e4 inputs");
    o.require(range, "range [0,1] on 1e4 inputs");
    return o;
}

Outcome poisson_statistics() {
    Outcome o;
    const std::size_t reps = 10000;
    for (double lambda : {5.0, 50.0, 500.0}) {
        const Region box = Region::unit_cube(2, 1.0);
        const Region left({0.0, 0.0}, {0.5, 1.0});
        std::vector<double> counts(reps), a(reps), b(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            const auto cloud = sample_poisson(box, lambda, {2, r});
            counts[r] = static_cast<double>(cloud.size());
            std::size_t nl = 0;
            for (std::size_t i = 0; i < cloud.size(); ++i) nl += left.contains(cloud.point(i));
            a[r] = static_cast<double>(nl);
            b[r] = counts[r] - a[r];
        }
        const double n = static_cast<double>(reps);
        const double m = stats::mean(counts);
        const double v = stats::variance(counts);
        const double sm = std::sqrt(lambda / n);
        const double var_s2 = (lambda + 3 * lambda * lambda) / n - lambda * lambda * (n - 3) / (n * (n - 1));
        const double sv = std::sqrt(var_s2);
        const auto ci = stats::bootstrap_correlation(a, b, 0.99, 1000, substream({2, 0}, "bootstrap", static_cast<std::uint64_t>(lambda)));
        const std::string tag = "lambda=" + num(lambda);
        o.require(std::abs(m - lambda) <= 4 * sm, tag + " mean");
        o.require(std::abs(v - lambda) <= 4 * sv, tag + " variance");
        o.require(ci.contains(0.0), tag + " disjoint correlation");
        o.note(tag + ": mean " + num(m, 6) + " var " + num(v, 6) + " corr CI [" + num(ci.lo, 2) + "," + num(ci.hi, 2) + "]");
    }
    return o;
}

Outcome mean_degree() {
    Outcome o;
    const auto spec = ConnectionSpec::polynomial_tail(2, 4.0);
    const double target = 2.0 * std::sqrt(std::numbers::pi);
    const auto pred = mean_degree_prediction(spec, 1.0);
    o.require(pred.converged && std::abs(pred.kernel_integral - target) < 1e-8, "quadrature oracle equals 2 sqrt(pi)");

    const double rho = 1.0;
    const Region box = Region::centered_cube(2, 60.0);
    std::vector<double> means;
    std::size_t bulk = 0;
    for (std::uint64_t r = 0; r < 4; ++r) {
        const auto cloud = sample_poisson(box, rho, {3, r});
        const auto edges = sample_edges(cloud, spec, {3, 100 + r});
        const auto g = WeightedGraph::from_edges(cloud, edges);
        const auto mask = bulk_vertices(cloud, 1.0 / 3.0);  // 20-unit boundary layer excluded
        const auto st = degree_stats(g, mask);
        means.push_back(st.mean);
        bulk += st.vertices;
    }
    const double m = stats::mean(means);
    const double rel = std::abs(m - rho * target) / (rho * target);
    o.require(rel <= 0.02, "bulk mean degree within 2%");
    o.note("quadrature " + num(pred.kernel_integral, 10) + ", empirical " + num(m, 5) + " over " + std::to_string(bulk) +
           " bulk vertices, rel. error " + num(rel, 2));
    return o;
}

Outcome resistance_oracle() {
    Outcome o;
    Rng rng(substream({4, 0}, "graphs", 0));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng.index(46);
        const WeightedGraph g(n, random_connected(n, rng, 0.08));
        const std::uint32_t sink[] = {static_cast<std::uint32_t>(n - 1)};
        const double it = effective_resistance(g, 0, sink).value;
        const double de = effective_resistance(g, 0, sink, dense_solver()).value;
        worst = std::max(worst, std::abs(it - de));
    }
    o.require(worst <= 1e-8, "CG vs dense within 1e-8");

    double law = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + rng.index(8);
        std::vector<WeightedEdge> series, parallel;
        double rs = 0.0, cp = 0.0;
        for (std::uint32_t i = 0; i < k; ++i) {
            const double c = 0.1 + 3.0 * rng.uniform();
            series.push_back({i, i + 1, c});
            rs += 1.0 / c;
            // Parallel branches through distinct midpoints: 0 - (2 + i) - 1.
            parallel.push_back({0, 2 + i, 2 * c});
            parallel.push_back({1, 2 + i, 2 * c});
            cp += c;
        }
        const std::uint32_t end[] = {static_cast<std::uint32_t>(k)};
        const std::uint32_t one[] = {1};
        law = std::max(law, std::abs(effective_resistance(WeightedGraph(k + 1, series), 0, end).value - rs) / rs);
        law = std::max(law, std::abs(effective_resistance(WeightedGraph(k + 2, parallel), 0, one).value * cp - 1.0));
    }
    o.require(law <= 1e-10, "series/parallel laws");

    int violations = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + rng.index(46);
        auto e = random_connected(n, rng, 0.05);
        const std::uint32_t sink[] = {static_cast<std::uint32_t>(n - 1)};
        const double before = effective_resistance(WeightedGraph(n, e), 0, sink, dense_solver()).value;
        for (int extra = 0; extra < 3; ++extra) {
            const auto u = static_cast<std::uint32_t>(rng.index(n));
            const auto v = static_cast<std::uint32_t>(rng.index(n));
            if (u != v) e.push_back({std::min(u, v), std::max(u, v), 0.2 + rng.uniform()});
        }
        const double after = effective_resistance(WeightedGraph(n, e), 0, sink, dense_solver()).value;
        violations += after > before + 1e-12;
    }
    o.require(violations == 0, "Rayleigh monotonicity");
    o.note("max |CG - dense| " + num(worst, 2) + ", max law rel. error " + num(law, 2) + ", Rayleigh violations " +
           std::to_string(violations));
    return o;
}

Outcome escape_identity() {
    Outcome o;
    Rng rng(substream({5, 0}, "graphs", 0));
    double worst_z = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 6 + rng.index(20);
        const WeightedGraph g(n, random_connected(n, rng, 0.15));
        std::vector<std::uint32_t> sinks{static_cast<std::uint32_t>(n - 1)};
        if (t % 2) sinks.push_back(static_cast<std::uint32_t>(n - 2));
        const double p = escape_probability(g, 0, sinks);
        const auto est = estimate_escape_frequency(g, 0, sinks, 100000, {5, static_cast<std::uint64_t>(t)});
        const double z = std::abs(est.frequency() - p) / stats::binomial_sigma(p, est.walks);
        worst_z = std::max(worst_z, z);
    }
    o.require(worst_z <= 4.0, "hitting frequency within 4 sigma on every fixture");
    o.note("worst deviation " + num(worst_z, 3) + " sigma over 20 graphs x 1e5 walks");
    return o;
}

// Palm configurations with at most max_vertices points.
std::vector<WeightedGraph> small_geometric(std::size_t count, std::size_t max_vertices, double half, double rho,
                                           std::uint64_t seed) {
    std::vector<WeightedGraph> out;
    for (std::uint64_t r = 0; out.size() < count; ++r) {
        const double alpha = 2.5 + 0.25 * static_cast<double>(r % 9);
        const auto cloud = palm_condition(sample_poisson(Region::centered_cube(2, half), rho, {seed, r}));
        if (cloud.size() > max_vertices) continue;
        out.push_back(WeightedGraph::from_edges(cloud, sample_edges(cloud, ConnectionSpec::polynomial_tail(2, alpha), {seed, 1000 + r})));
    }
    return out;
}

Outcome projection() {
    Outcome o;
    const auto graphs = small_geometric(50, 60, 3.0, 1.4, 6);
    double longest = 0.0;
    bool dominated = true, short_kept = true;
    int increases = 0, compared = 0;
    std::size_t long_edges = 0;
    for (const auto& g : graphs) {
        const auto p = project_long_edges(g);
        long_edges += p.long_edges;
        longest = std::max(longest, max_edge_length(p.graph));
        for (const auto& e : p.graph.edge_list()) dominated = dominated && e.conductance >= 1.0;
        for (const auto& e : g.edge_list()) {
            const auto a = g.position(e.u), b = g.position(e.v);
            const double len = std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
            if (len <= 1.0) short_kept = short_kept && p.graph.conductance(e.u, e.v) >= e.conductance;
        }
        const auto labels = connected_components(g);
        std::uint32_t far = 0;
        double best = -1.0;
        for (std::uint32_t v = 1; v < g.vertex_count(); ++v) {
            if (labels.label[v] == labels.label[0] && sup_norm(g.position(v)) > best) {
                best = sup_norm(g.position(v));
                far = v;
            }
        }
        if (far == 0) continue;
        const std::uint32_t sink[] = {far};
        const double before = effective_resistance(g, 0, sink, dense_solver()).value;
        const double after = effective_resistance(p.graph, 0, sink, dense_solver()).value;
        increases += after > before + 1e-9;
        ++compared;
    }
    o.require(longest <= 1.0, "max edge length <= 1");
    o.require(dominated && short_kept, "conductance domination");
    o.require(increases == 0 && compared >= 30, "R_eff non-increase");
    o.note("50 instances, " + std::to_string(long_edges) + " long edges projected, max length " + num(longest, 6) + ", " +
           std::to_string(compared) + " resistance comparisons, " + std::to_string(increases) + " increases");
    return o;
}

Outcome nash_williams() {
    Outcome o;
    int fixtures = 0, violations = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::uint64_t s = 0; fixtures < 30 && s < 200; ++s) {
        const Region box = Region::centered_cube(2, 7.0);
        const double alpha = 3.0 + 0.25 * static_cast<double>(s % 7);
        const auto cloud = palm_condition(sample_poisson(box, 1.5, {7, s}));
        const auto g = WeightedGraph::from_edges(cloud, sample_edges(cloud, ConnectionSpec::polynomial_tail(2, alpha), {7, 500 + s}));
        const auto p = project_long_edges(g).graph;
        const auto labels = connected_components(p);
        std::vector<std::uint32_t> sinks;
        for (std::uint32_t v = 0; v < p.vertex_count(); ++v) {
            if (labels.label[v] == labels.label[0] && sup_norm(p.position(v)) > 5.0) sinks.push_back(v);
        }
        if (sinks.empty()) continue;
        const double bound = nash_williams_bound(cutset_report(p, {1, 3, 5}, box));
        const double r = effective_resistance(p, 0, sinks, dense_solver()).value;
        violations += bound > r + 1e-8;
        min_gap = std::min(min_gap, r - bound);
        ++fixtures;
    }
    o.require(fixtures == 30, "30 fixtures");
    o.require(violations == 0, "bound <= R_eff");
    o.note(std::to_string(fixtures) + " fixtures, smallest R_eff - bound " + num(min_gap, 3));
    return o;
}

Outcome cutset_trend() {
    Outcome o;
    const std::vector<int> radii{8, 16, 32, 64};
    ScalingOptions opt;
    opt.window_factor = 2.0;
    opt.sampling.pair_budget = 1'000'000;
    const auto rec = cutset_scaling_experiment(ConnectionSpec::polynomial_tail(2, 4.5), 2.0, radii, 200, {8, 0}, opt);
    std::string q = "alpha=4.5 q90:";
    for (std::size_t k = 0; k < radii.size(); ++k) {
        q += " " + num(rec.quantile90[k]) + " [" + num(rec.quantile90_ci[k].lo) + "," + num(rec.quantile90_ci[k].hi) + "]";
        if (k + 1 < radii.size()) {
            o.require(rec.quantile90[k + 1] <= rec.quantile90_ci[k].hi,
                      "non-increasing at n=" + std::to_string(radii[k + 1]));
        }
    }
    o.note(q);
    const auto con = cutset_scaling_experiment(ConnectionSpec::polynomial_tail(2, 3.0), 2.0, radii, 40, {8, 1}, opt);
    std::string c = "alpha=3 q90:";
    for (std::size_t k = 0; k < radii.size(); ++k) {
        c += " " + num(con.quantile90[k]);
        if (k + 1 < radii.size()) {
            o.require(con.quantile90[k + 1] > con.quantile90_ci[k].hi, "contrast increase at n=" + std::to_string(radii[k + 1]));
        }
    }
    o.note(c);
    return o;
}

Outcome resistance_growth() {
    Outcome o;
    const std::vector<int> radii{4, 8, 16, 32};
    const auto rec = resistance_growth_profile(ConnectionSpec::polynomial_tail(2, 4.5), 2.0, radii, 100, {9, 0});
    std::vector<double> x;
    for (int n : radii) x.push_back(std::log(static_cast<double>(n)));
    const auto fit = stats::linear_fit(x, rec.mean);
    o.require(fit.slope > 0.0, "alpha=4.5 slope > 0");
    o.require(fit.r_squared >= 0.9, "alpha=4.5 R^2 >= 0.9");
    o.note("alpha=4.5 slope " + num(fit.slope) + " R^2 " + num(fit.r_squared) + " (" + std::to_string(rec.kept) + " replicas)");

    const auto tr = resistance_growth_profile(ConnectionSpec::polynomial_tail(2, 3.0), 2.0, radii, 300, {9, 1});
    std::string inc = "alpha=3 increments:";
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
        const double d = tr.mean[k + 1] - tr.mean[k];
        inc += " " + num(d, 3);
        if (k + 2 < radii.size()) o.require(tr.mean[k + 2] - tr.mean[k + 1] < d, "increments decreasing");
    }
    o.note(inc);
    return o;
}

Outcome inter_cluster_bound() {
    Outcome o;
    const double eps = 1.0 / 6.0;
    const auto spec = ConnectionSpec::polynomial_tail(2, 3.0);
    const Region region = Region::unit_cube(2, 19.0 / 3.0);
    const std::vector<std::pair<int, int>> cells{{3, 1}, {5, 2}, {8, 3}};
    std::map<int, std::vector<CoarseConfig>> configs;
    auto trials = [&](int beta, int k) {
        for (const auto& f : bond_frequencies_by_k(configs[beta])) {
            if (f.distance == k) return f;
        }
        return BondFrequency{k, 0, 0};
    };
    for (std::uint64_t r = 0; r < 12; ++r) {
        const auto cloud = sample_poisson(region, 100.0, {10, r});
        const auto edges = sample_edges(cloud, spec, {10, 100 + r});
        for (auto [beta, k] : cells) configs[beta].push_back(coarse_graph(cloud, edges, eps, beta, 3));
        bool enough = r >= 1;
        for (auto [beta, k] : cells) enough = enough && trials(beta, k).trials >= 1000;
        if (enough) break;
    }
    for (auto [beta, k] : cells) {
        const auto f = trials(beta, k);
        const double bound = lemma_tr2_bound(beta, k, 3.0);
        const double sigma = stats::binomial_sigma(bound, f.trials);
        const std::string tag = "(beta=" + std::to_string(beta) + ",k=" + std::to_string(k) + ")";
        o.require(f.trials >= 1000, tag + " >= 1000 pairs");
        o.require(f.frequency() >= bound - 4 * sigma, tag + " frequency >= bound - 4 sigma");
        o.note(tag + " " + num(f.frequency(), 5) + " vs " + num(bound, 5) + " over " + std::to_string(f.trials));
    }
    return o;
}

Outcome good_box_monotonicity() {
    Outcome o;
    const auto spec = ConnectionSpec::polynomial_tail(2, 3.0);
    const Region region = Region::unit_cube(2, 6.0);
    const std::vector<double> rhos{5, 10, 20, 40, 60, 80};
    std::vector<double> p, s;
    std::string line = "eps=0.25 beta=5 alpha=3 P(good):";
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        std::vector<CoarseConfig> configs;
        for (std::uint64_t r = 0; r < 10; ++r) {
            const auto cloud = sample_poisson(region, rhos[i], substream({11, i}, "points", r));
            const auto edges = sample_edges(cloud, spec, substream({11, i}, "edges", r));
            configs.push_back(coarse_graph(cloud, edges, 0.25, 5, 1));
        }
        std::size_t full = 0;
        for (const auto& c : configs) full += c.full_boxes();
        p.push_back(site_frequency(configs));
        s.push_back(stats::binomial_sigma(p.back(), full));
        line += " " + num(p.back(), 4);
    }
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const double tol = 4 * std::sqrt(s[i] * s[i] + s[i + 1] * s[i + 1]);
        o.require(p[i + 1] >= p[i] - tol, "non-decreasing at rho=" + num(rhos[i + 1]));
    }
    o.require(p.back() > 0.9, "P(good) > 0.9 at rho=80");
    o.note(line + " (1440 boxes per rho)");
    return o;
}

Outcome lattice_comparator() {
    Outcome o;
    const double lambda = 1.0, alpha = 3.0;
    std::vector<std::uint64_t> pairs, bonds;
    for (std::uint64_t r = 0; r < 30; ++r) {
        const auto c = sample_lrp(2, 10, lambda, 0.8, alpha, {12, r});
        pairs.resize(c.pairs_at.size());
        bonds.resize(c.bonds_at.size());
        for (std::size_t m = 0; m < c.pairs_at.size(); ++m) {
            pairs[m] += c.pairs_at[m];
            bonds[m] += c.bonds_at[m];
        }
    }
    double worst = 0.0;
    std::size_t distances = 0;
    for (std::size_t m = 1; m < pairs.size(); ++m) {
        if (pairs[m] == 0) continue;
        ++distances;
        const double q = lrp_bond_probability(lambda, alpha, static_cast<int>(m));
        const double f = static_cast<double>(bonds[m]) / static_cast<double>(pairs[m]);
        worst = std::max(worst, std::abs(f - q) / stats::binomial_sigma(q, pairs[m]));
    }
    o.require(worst <= 4.0, "bond frequencies within 4 sigma");
    o.note("lattice bonds d=2 L=10 lambda=1 alpha=3: worst " + num(worst, 3) + " sigma over " +
           std::to_string(distances) + " distances");

    // Coarse-grained continuum configuration against the lattice model it
    // should dominate: same grid (19 x 19), same bond range, (lambda1, mu1).
    const double eps = 1.0 / 6.0;
    const DominationParams params{DominationMode::long_range, 1.0, 0.5, 0.5};
    std::vector<CoarseConfig> configs;
    std::vector<double> coarse_frac;
    int max_m = 0;
    for (std::uint64_t r = 0; r < 4; ++r) {
        const auto cloud = sample_poisson(Region::unit_cube(2, 19.0 / 3.0), 100.0, {12, 100 + r});
        const auto edges = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, alpha), {12, 200 + r});
        configs.push_back(coarse_graph(cloud, edges, eps, 5, 3));
        coarse_frac.push_back(coarse_largest_fraction(configs.back()));
        for (const auto& b : configs.back().bonds) max_m = std::max(max_m, b.index_l1);
    }
    const auto rep = domination_report(configs, params);
    o.require(rep.all_pass, "domination report passes");
    std::vector<double> lattice_frac;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto c = sample_lrp(2, 9, params.lambda1, params.mu1, alpha, {12, 300 + r}, {max_m, 5e7});
        lattice_frac.push_back(lattice_cluster_stats(c).largest_fraction_all);
    }
    const double cm = stats::mean(coarse_frac), lm = stats::mean(lattice_frac);
    const double se = std::hypot(stats::std_error(coarse_frac), stats::std_error(lattice_frac));
    o.require(cm >= lm - 4 * se, "coarse largest cluster dominates the lattice one");
    o.note("site freq " + num(rep.site_frequency) + ", " + std::to_string(rep.cells.size() - 1) +
           " bond cells; largest-cluster fraction coarse " + num(cm) + " vs lattice " + num(lm) + " (k_max " +
           std::to_string(max_m) + ")");
    return o;
}

Outcome quadrature() {
    Outcome o;
    const auto spec = ConnectionSpec::polynomial_tail(2, 4.0);
    auto ratio_check = [&](const IntegralReport& r, const std::string& what) {
        const double ratio = r.differences[0] / r.differences[1];
        o.require(r.converged, what + " quadrature tolerance");
        o.require(std::abs(r.differences[1]) * 2.0 <= std::abs(r.differences[0]), what + " differences shrink by >= 2");
        o.note(what + " values " + num(r.values[0], 7) + ", " + num(r.values[1], 7) + ", " + num(r.values[2], 7) +
               " diff ratio " + num(ratio, 4));
    };
    ratio_check(integrate_connection(spec, Region::unit_cube(2), 8.0), "box exterior");
    ratio_check(integrate_quadrant_pair(spec, 1, 3, 8.0), "quadrants 1,3");
    // Adjacent quadrants share a boundary ray, so their integral grows
    // linearly in T for every alpha; reported, not required.
    const auto adj = integrate_quadrant_pair(spec, 1, 2, 8.0);
    o.note("quadrants 1,2 (informational) diff ratio " + num(adj.differences[0] / adj.differences[1], 4));

    const auto blob = integrate_connection(ConnectionSpec::blob(2, 1.0), Region::unit_cube(2), 8.0, 1e-9);
    const double err = std::abs(blob.value - 7.0 / 6.0);
    o.require(err <= 1e-6, "blob value matches 7/6");
    o.note("blob |value - 7/6| " + num(err, 2));
    return o;
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome reproducibility() {
    Outcome o;
    const std::vector<std::pair<std::string, std::map<std::string, std::string>>> runs{
        {"sample", {{"half_width", "5"}, {"palm", "1"}}},
        {"percolate", {{"half_width", "5"}, {"replicas", "4"}}},
        {"walk", {{"half_width", "5"}, {"replicas", "4"}, {"horizon", "200"}}},
        {"resistance-profile", {{"radii", "2,4,6"}, {"replicas", "4"}}},
        {"cutsets", {{"radii", "2,4,6"}, {"replicas", "6"}}},
        {"renormalize", {{"boxes", "7"}, {"replicas", "2"}}},
        {"lrp", {{"L", "5"}, {"replicas", "4"}}},
        {"integrals", {}},
        {"threshold", {{"half_width", "4"}, {"replicas", "4"}, {"relative_width", "0.2"}}},
    };
    const auto root = fs::temp_directory_path() / "rcm_acceptance_replay";
    fs::remove_all(root);
    std::size_t files = 0;
    for (const auto& [cmd, values] : runs) {
        std::ostringstream log;
        cli::ExperimentConfig first;
        first.command = cmd;
        first.values = values;
        first.out_dir = root / (cmd + "_a");
        const int code = cli::run(first, log);
        o.require(code == cli::ok, cmd + " exit code " + std::to_string(code));
        auto again = cli::load_config(first.out_dir / "manifest.txt");
        again.out_dir = root / (cmd + "_b");
        o.require(cli::run(again, log) == code, cmd + " replay exit code");
        // The replayed manifest sets every key explicitly, so only its
        // "# defaulted" line may differ.
        auto manifest = [](const fs::path& f) {
            std::string kept;
            std::istringstream in(slurp(f));
            for (std::string line; std::getline(in, line);) {
                if (line.rfind("# defaulted", 0) != 0) kept += line + '\n';
            }
            return kept;
        };
        bool same = manifest(first.out_dir / "manifest.txt") == manifest(again.out_dir / "manifest.txt");
        for (const auto& entry : fs::directory_iterator(first.out_dir)) {
            const auto name = entry.path().filename();
            if (name == "manifest.txt") continue;
            same = same && slurp(entry.path()) == slurp(again.out_dir / name);
            ++files;
        }
        o.require(same, cmd + " artifacts identical");
    }
    fs::remove_all(root);
    o.note("9 subcommands, " + std::to_string(files) + " artifacts compared byte for byte, manifests equal up to the defaulted-key line");
    return o;
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "kernel exactness", 1, kernel_exactness},
        {2, "Poisson statistics", 60, poisson_statistics},
        {3, "mean degree", 300, mean_degree},
        {4, "resistance oracle equivalence", 60, resistance_oracle},
        {5, "escape identity", 300, escape_identity},
        {6, "projection correctness", 60, projection},
        {7, "Nash-Williams bound", 60, nash_williams},
        {8, "cut-set scaling trend", 1800, cutset_trend},
        {9, "resistance growth trends", 1800, resistance_growth},
        {10, "inter-cluster connection bound", 900, inter_cluster_bound},
        {11, "good-box monotonicity", 600, good_box_monotonicity},
        {12, "lattice comparator", 600, lattice_comparator},
        {13, "quadrature convergence", 60, quadrature},
        {14, "manifest reproducibility", 600, reproducibility},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

    int failed = 0, ran = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.note(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) {
            out.pass = false;
            out.note("FAILED runtime budget " + num(c.budget_seconds) + " s");
        }
        ++ran;
        failed += !out.pass;
        std::printf("%s %2d %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed ? 1 : 0;
}
