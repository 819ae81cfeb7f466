#pragma once

#include "rcm/graph.hpp"
#include "rcm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace rcm {

/// Bond-site long-range percolation on {-L, ..., L}^d. Sites are open with
/// probability mu; the pair {x, y} carries a bond with probability
/// 1 - exp(-lambda / |x - y|_1^alpha), independently of the sites. Pairs
/// farther apart than k_max are not sampled; their expected bond count is
/// reported as skipped_mass.
struct LatticeConfig {
    int dim = 0;
    int half_side = 0;  ///< L
    double lambda = 0.0;
    double mu = 0.0;
    double alpha = 0.0;
    int k_max = 0;
    RngStream stream;
    std::vector<bool> site_open;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> bonds;  ///< i < j, sorted
    /// Indexed by 1-norm distance: pairs examined and bonds drawn.
    std::vector<std::uint64_t> pairs_at;
    std::vector<std::uint64_t> bonds_at;
    double skipped_mass = 0.0;

    [[nodiscard]] std::size_t side() const { return static_cast<std::size_t>(2 * half_side + 1); }
    [[nodiscard]] std::size_t site_count() const { return site_open.size(); }
    /// Lattice coordinates of a site, each in [-L, L].
    [[nodiscard]] std::vector<int> coords(std::size_t site) const;
    [[nodiscard]] std::size_t site_id(const std::vector<int>& x) const;
};

struct LrpOptions {
    int k_max = 0;  ///< 0 selects L
    /// Guard on the expected number of bonds.
    double bond_budget = 5e7;
};

double lrp_bond_probability(double lambda, double alpha, int distance);

LatticeConfig sample_lrp(int dim, int half_side, double lambda, double mu, double alpha, const RngStream& stream,
                         const LrpOptions& options = {});

struct LatticeClusterStats {
    std::size_t open_sites = 0;
    std::size_t total_sites = 0;
    std::size_t largest = 0;           ///< largest cluster of open sites
    double largest_fraction_open = 0.0;  ///< largest / open_sites (0 when none open)
    double largest_fraction_all = 0.0;   ///< largest / total_sites
    ClusterLabels labels;  ///< closed sites are singletons
};

/// Clusters formed by bonds whose endpoints are both open.
LatticeClusterStats lattice_cluster_stats(const LatticeConfig& config);

/// Unit-conductance graph on all sites (lattice coordinates attached),
/// containing the bonds between open sites.
WeightedGraph to_weighted_graph(const LatticeConfig& config);

/// "LATTICE d=.. L=.. lambda=.. mu=.. alpha=.. kmax=.. seed=.. stream=.. sites=.. bonds=.. skipped=.."
/// then one line of site flags (0/1) and one "i j" line per bond.
void write_lattice(std::ostream& out, const LatticeConfig& config);
LatticeConfig read_lattice(std::istream& in);

}  // namespace rcm
