#include "rcm/lrp.hpp"

#include "rcm/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rcm {

std::vector<int> LatticeConfig::coords(std::size_t site) const {
    std::vector<int> x(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
        x[a] = static_cast<int>(site % side()) - half_side;
        site /= side();
    }
    return x;
}

std::size_t LatticeConfig::site_id(const std::vector<int>& x) const {
    std::size_t id = 0;
    for (int a = dim - 1; a >= 0; --a) {
        if (std::abs(x[a]) > half_side) throw std::out_of_range("site_id: outside the lattice");
        id = id * side() + static_cast<std::size_t>(x[a] + half_side);
    }
    return id;
}

double lrp_bond_probability(double lambda, double alpha, int distance) {
    return -std::expm1(-lambda / std::pow(static_cast<double>(distance), alpha));
}

namespace {

// Calls fn(offset, l1) for every nonzero offset with positive leading
// nonzero component and |o_a| <= reach.
template <typename Fn>
void for_each_offset(int dim, int reach, Fn&& fn) {
    std::vector<int> off(static_cast<std::size_t>(dim), -reach);
    for (;;) {
        int l1 = 0;
        int lead = 0;
        for (int a = dim - 1; a >= 0; --a) {
            l1 += std::abs(off[a]);
            if (lead == 0 && off[a] != 0) lead = off[a];
        }
        if (lead > 0) fn(off, l1);
        int a = 0;
        while (a < dim && ++off[a] > reach) off[a++] = -reach;
        if (a == dim) break;
    }
}

}  // namespace

LatticeConfig sample_lrp(int dim, int half_side, double lambda, double mu, double alpha, const RngStream& stream,
                         const LrpOptions& options) {
    if (dim < 1) throw std::invalid_argument("sample_lrp: d must be >= 1");
    if (half_side < 1) throw std::invalid_argument("sample_lrp: L must be >= 1");
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("sample_lrp: mu must lie in [0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("sample_lrp: lambda must be > 0");
    if (!(alpha > dim) || !std::isfinite(alpha)) throw std::invalid_argument("sample_lrp: alpha must exceed d");
    if (options.k_max < 0) throw std::invalid_argument("sample_lrp: k_max must be >= 0");

    LatticeConfig cfg;
    cfg.dim = dim;
    cfg.half_side = half_side;
    cfg.lambda = lambda;
    cfg.mu = mu;
    cfg.alpha = alpha;
    cfg.k_max = options.k_max == 0 ? half_side : options.k_max;
    cfg.stream = stream;
    const auto side = static_cast<std::int64_t>(cfg.side());
    std::size_t sites = 1;
    for (int a = 0; a < dim; ++a) sites *= cfg.side();
    if (sites > 0xffffffffULL) throw std::invalid_argument("sample_lrp: lattice too large");

    Rng site_rng(substream(stream, "sites"));
    cfg.site_open.resize(sites);
    for (std::size_t s = 0; s < sites; ++s) cfg.site_open[s] = site_rng.bernoulli(mu);

    const int reach = 2 * half_side;
    const int max_l1 = dim * reach;
    cfg.pairs_at.assign(static_cast<std::size_t>(max_l1) + 1, 0);
    cfg.bonds_at.assign(static_cast<std::size_t>(max_l1) + 1, 0);

    // Expected bond count first, so the budget check happens before sampling.
    double expected = 0.0;
    for_each_offset(dim, reach, [&](const std::vector<int>& off, int l1) {
        std::uint64_t count = 1;
        for (int a = 0; a < dim; ++a) count *= static_cast<std::uint64_t>(side - std::abs(off[a]));
        const double mass = static_cast<double>(count) * lrp_bond_probability(lambda, alpha, l1);
        if (l1 > cfg.k_max) {
            cfg.skipped_mass += mass;
        } else {
            cfg.pairs_at[l1] += count;
            expected += mass;
        }
    });
    if (expected > options.bond_budget) {
        throw std::invalid_argument("sample_lrp: expected bond count " + format_double(expected) +
                                    " exceeds the bond budget");
    }

    std::uint64_t ordinal = 0;
    for_each_offset(dim, std::min(reach, cfg.k_max), [&](const std::vector<int>& off, int l1) {
        const std::uint64_t my = ordinal++;
        if (l1 > cfg.k_max) return;
        std::vector<std::int64_t> extent(dim), start(dim);
        std::uint64_t count = 1;
        for (int a = 0; a < dim; ++a) {
            extent[a] = side - std::abs(off[a]);
            start[a] = std::max<std::int64_t>(0, -off[a]);
            count *= static_cast<std::uint64_t>(extent[a]);
        }
        const double p = lrp_bond_probability(lambda, alpha, l1);
        Rng rng(substream(stream, "offset", my));
        std::uint64_t t = rng.geometric_skip(p);
        while (t < count) {
            std::uint64_t rem = t;
            std::size_t i = 0, j = 0, stride = 1;
            for (int a = 0; a < dim; ++a) {
                const auto xa = start[a] + static_cast<std::int64_t>(rem % static_cast<std::uint64_t>(extent[a]));
                rem /= static_cast<std::uint64_t>(extent[a]);
                i += static_cast<std::size_t>(xa) * stride;
                j += static_cast<std::size_t>(xa + off[a]) * stride;
                stride *= static_cast<std::size_t>(side);
            }
            cfg.bonds.emplace_back(static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j)));
            ++cfg.bonds_at[l1];
            const std::uint64_t skip = rng.geometric_skip(p);
            if (skip >= count - t) break;
            t += skip + 1;
        }
    });
    std::sort(cfg.bonds.begin(), cfg.bonds.end());
    return cfg;
}

LatticeClusterStats lattice_cluster_stats(const LatticeConfig& config) {
    const std::size_t n = config.site_count();
    DisjointSets sets(n);
    for (const auto& [i, j] : config.bonds) {
        if (config.site_open[i] && config.site_open[j]) sets.unite(i, j);
    }
    LatticeClusterStats st;
    st.labels = labels_from_sets(sets, n);
    st.total_sites = n;
    for (std::size_t s = 0; s < n; ++s) {
        if (!config.site_open[s]) continue;
        ++st.open_sites;
        st.largest = std::max(st.largest, st.labels.cluster_size_of(s));
    }
    st.largest_fraction_open = st.open_sites ? static_cast<double>(st.largest) / static_cast<double>(st.open_sites) : 0.0;
    st.largest_fraction_all = n ? static_cast<double>(st.largest) / static_cast<double>(n) : 0.0;
    return st;
}

WeightedGraph to_weighted_graph(const LatticeConfig& config) {
    std::vector<WeightedEdge> edges;
    for (const auto& [i, j] : config.bonds) {
        if (config.site_open[i] && config.site_open[j]) edges.push_back({i, j, 1.0});
    }
    std::vector<double> coords;
    coords.reserve(config.site_count() * static_cast<std::size_t>(config.dim));
    for (std::size_t s = 0; s < config.site_count(); ++s) {
        for (int x : config.coords(s)) coords.push_back(x);
    }
    return WeightedGraph(config.site_count(), edges, config.dim, std::move(coords));
}

void write_lattice(std::ostream& out, const LatticeConfig& c) {
    out << "LATTICE d=" << c.dim << " L=" << c.half_side << " lambda=" << format_double(c.lambda)
        << " mu=" << format_double(c.mu) << " alpha=" << format_double(c.alpha) << " kmax=" << c.k_max
        << " seed=" << c.stream.seed << " stream=" << c.stream.stream_id << " sites=" << c.site_count()
        << " bonds=" << c.bonds.size() << " skipped=" << format_double(c.skipped_mass) << '\n';
    std::string flags(c.site_count(), '0');
    for (std::size_t s = 0; s < c.site_count(); ++s) {
        if (c.site_open[s]) flags[s] = '1';
    }
    out << flags << '\n';
    for (const auto& [i, j] : c.bonds) out << i << ' ' << j << '\n';
}

LatticeConfig read_lattice(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("lattice snapshot: empty input");
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "LATTICE") throw std::invalid_argument("lattice snapshot: expected LATTICE header");
    std::map<std::string, std::string> kv;
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("lattice snapshot: malformed token " + tok);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    LatticeConfig c;
    c.dim = std::stoi(kv.at("d"));
    c.half_side = std::stoi(kv.at("L"));
    c.lambda = std::stod(kv.at("lambda"));
    c.mu = std::stod(kv.at("mu"));
    c.alpha = std::stod(kv.at("alpha"));
    c.k_max = std::stoi(kv.at("kmax"));
    c.stream = RngStream{std::stoull(kv.at("seed")), std::stoull(kv.at("stream"))};
    c.skipped_mass = std::stod(kv.at("skipped"));
    const std::size_t sites = std::stoull(kv.at("sites"));
    std::string flags;
    if (!(in >> flags) || flags.size() != sites) throw std::invalid_argument("lattice snapshot: bad site flags");
    c.site_open.resize(sites);
    for (std::size_t s = 0; s < sites; ++s) c.site_open[s] = flags[s] == '1';
    const std::size_t m = std::stoull(kv.at("bonds"));
    const int max_l1 = c.dim * 2 * c.half_side;
    c.pairs_at.assign(static_cast<std::size_t>(max_l1) + 1, 0);
    c.bonds_at.assign(static_cast<std::size_t>(max_l1) + 1, 0);
    for (std::size_t k = 0; k < m; ++k) {
        std::uint64_t i = 0, j = 0;
        if (!(in >> i >> j) || !(i < j) || j >= sites) throw std::invalid_argument("lattice snapshot: bad bond line");
        c.bonds.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        const auto xi = c.coords(i);
        const auto xj = c.coords(j);
        int l1 = 0;
        for (int a = 0; a < c.dim; ++a) l1 += std::abs(xi[a] - xj[a]);
        ++c.bonds_at[l1];
    }
    // Pair counts are a function of the geometry alone.
    const auto side = static_cast<std::int64_t>(c.side());
    for_each_offset(c.dim, 2 * c.half_side, [&](const std::vector<int>& off, int l1) {
        if (l1 > c.k_max) return;
        std::uint64_t count = 1;
        for (int a = 0; a < c.dim; ++a) count *= static_cast<std::uint64_t>(side - std::abs(off[a]));
        c.pairs_at[l1] += count;
    });
    return c;
}

}  // namespace rcm
