#include "rcm/renormalization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace rcm {

namespace {

constexpr double kZ99 = 2.3263478740408408;  // one-sided 99% normal quantile

std::size_t clamp_index(double t, std::size_t count) {
    if (!(t >= 0.0)) return 0;
    const auto i = static_cast<std::size_t>(t);
    return std::min(i, count - 1);
}

FrequencyCell make_cell(std::string label, std::size_t trials, std::size_t successes, double reference) {
    FrequencyCell c;
    c.label = std::move(label);
    c.trials = trials;
    c.successes = successes;
    c.reference = reference;
    if (trials > 0) {
        c.frequency = static_cast<double>(successes) / static_cast<double>(trials);
        c.sigma = stats::binomial_sigma(c.frequency, trials);
    }
    c.lower99 = c.frequency - kZ99 * c.sigma;
    c.pass = trials > 0 && c.lower99 >= reference;
    return c;
}

}  // namespace

BoxGrid::BoxGrid(const PointCloud& cloud, const EdgeList& edges, double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("partition_boxes: epsilon must be > 0");
    if (edges.point_count != cloud.size()) throw std::invalid_argument("partition_boxes: edge list belongs to a different cloud");
    const auto& region = cloud.region();
    const int d = region.dim();
    const double side = 2.0 * epsilon;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        if (side > region.width(a) * (1.0 + 1e-12)) {
            throw std::invalid_argument("partition_boxes: box side 2*epsilon exceeds the region");
        }
        // Tolerate rounding when the width is a multiple of the side.
        const double ratio = region.width(a) / side;
        const double rounded = std::round(ratio);
        const auto count = static_cast<std::size_t>(std::abs(ratio - rounded) < 1e-9 ? rounded : std::ceil(ratio));
        per_axis_.push_back(count);
        total *= count;
    }
    partial_.assign(total, false);
    for (std::size_t b = 0; b < total; ++b) {
        const auto idx = box_index(b);
        for (int a = 0; a < d; ++a) {
            if (region.lo()[a] + side * static_cast<double>(idx[a] + 1) > region.hi()[a] * (1.0 + 1e-12) + 1e-12) {
                partial_[b] = true;
            }
        }
    }

    const std::size_t n = cloud.size();
    point_box_.resize(n);
    std::vector<std::size_t> counts(total + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = cloud.point(i);
        std::size_t id = 0;
        for (int a = d - 1; a >= 0; --a) id = id * per_axis_[a] + clamp_index((p[a] - region.lo()[a]) / side, per_axis_[a]);
        point_box_[i] = id;
        ++counts[id + 1];
    }
    box_start_.assign(total + 1, 0);
    for (std::size_t b = 0; b < total; ++b) box_start_[b + 1] = box_start_[b] + counts[b + 1];
    point_ids_.resize(n);
    std::vector<std::size_t> fill(box_start_.begin(), box_start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i) point_ids_[fill[point_box_[i]]++] = static_cast<std::uint32_t>(i);

    // Within-box clusters from edges whose ends share a box.
    DisjointSets sets(n);
    for (const auto& [i, j] : edges.pairs) {
        if (point_box_[i] == point_box_[j]) sets.unite(i, j);
    }
    const auto labels = labels_from_sets(sets, n);
    sizes_.resize(total);
    designated_.assign(n, false);
    for (std::size_t b = 0; b < total; ++b) {
        auto pts = points_in(b);
        std::uint32_t best = 0;
        std::size_t best_size = 0;
        for (auto i : pts) {
            if (labels.label[i] != i) continue;  // one entry per cluster, at its smallest point
            sizes_[b].push_back(labels.size_of_label[i]);
            // Points are visited in increasing index order, so the first
            // cluster of maximal size has the smallest index.
            if (labels.size_of_label[i] > best_size) {
                best_size = labels.size_of_label[i];
                best = i;
            }
        }
        std::sort(sizes_[b].begin(), sizes_[b].end(), std::greater<>());
        for (auto i : pts) designated_[i] = best_size > 0 && labels.label[i] == best;
    }
}

std::vector<std::int64_t> BoxGrid::box_index(std::size_t box) const {
    std::vector<std::int64_t> idx(per_axis_.size());
    for (std::size_t a = 0; a < per_axis_.size(); ++a) {
        idx[a] = static_cast<std::int64_t>(box % per_axis_[a]);
        box /= per_axis_[a];
    }
    return idx;
}

std::size_t BoxGrid::box_id(const std::vector<std::int64_t>& index) const {
    if (index.size() != per_axis_.size()) throw std::invalid_argument("box_id: dimension mismatch");
    std::size_t id = 0;
    for (int a = dim() - 1; a >= 0; --a) {
        if (index[a] < 0 || static_cast<std::size_t>(index[a]) >= per_axis_[a]) {
            throw std::out_of_range("box_id: index outside the grid");
        }
        id = id * per_axis_[a] + static_cast<std::size_t>(index[a]);
    }
    return id;
}

BoxGrid partition_boxes(const PointCloud& cloud, const EdgeList& edges, double epsilon) {
    return BoxGrid(cloud, edges, epsilon);
}

bool good_box(const BoxGrid& grid, std::size_t box, int beta) {
    if (beta < 1) throw std::invalid_argument("good_box: beta must be >= 1");
    if (box >= grid.box_count()) throw std::out_of_range("good_box: invalid box index");
    return grid.largest_cluster(box) >= static_cast<std::size_t>(beta);
}

double lemma_tr2_bound(int beta, double k, double alpha) {
    if (std::isinf(k)) return 0.0;
    const double b = beta;
    return -std::expm1(-b * b / std::pow(k, alpha));
}

int box_distance_bound(int index_l1, int dim, double epsilon) {
    return static_cast<int>(std::ceil(2.0 * epsilon * (index_l1 + dim) - 1e-9));
}

std::size_t CoarseConfig::full_boxes() const {
    return static_cast<std::size_t>(std::count(partial.begin(), partial.end(), false));
}

std::size_t CoarseConfig::good_boxes() const {
    return static_cast<std::size_t>(std::count(good.begin(), good.end(), true));
}

CoarseConfig coarse_graph(const PointCloud& cloud, const EdgeList& edges, double epsilon, int beta, int max_k) {
    if (beta < 1) throw std::invalid_argument("coarse_graph: beta must be >= 1");
    if (max_k < 1) throw std::invalid_argument("coarse_graph: max_k must be >= 1");
    const BoxGrid grid(cloud, edges, epsilon);
    const int d = grid.dim();

    CoarseConfig cfg;
    cfg.dim = d;
    cfg.epsilon = epsilon;
    cfg.beta = beta;
    cfg.rho = cloud.provenance().rho;
    cfg.alpha = edges.spec.alpha();
    cfg.max_k = max_k;
    cfg.boxes_per_axis = grid.boxes_per_axis();
    const std::size_t nb = grid.box_count();
    cfg.good.resize(nb);
    cfg.partial.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        cfg.partial[b] = grid.partial(b);
        cfg.good[b] = !cfg.partial[b] && good_box(grid, b, beta);
    }

    // Largest index distance whose bound stays within max_k.
    int max_m = 0;
    while (box_distance_bound(max_m + 1, d, epsilon) <= max_k) ++max_m;

    // Offsets with positive lexicographic sign and 1-norm in [1, max_m].
    std::vector<std::vector<std::int64_t>> offsets;
    std::vector<std::int64_t> off(d, -max_m);
    for (;;) {
        int l1 = 0;
        for (auto v : off) l1 += static_cast<int>(std::abs(v));
        bool positive = false;
        for (auto v : off) {
            if (v != 0) {
                positive = v > 0;
                break;
            }
        }
        if (l1 >= 1 && l1 <= max_m && positive) offsets.push_back(off);
        int a = 0;
        while (a < d && ++off[a] > max_m) off[a++] = -max_m;
        if (a == d) break;
    }

    std::unordered_map<std::uint64_t, std::size_t> slot;
    for (std::size_t b = 0; b < nb; ++b) {
        if (cfg.partial[b]) continue;
        const auto idx = grid.box_index(b);
        for (const auto& o : offsets) {
            std::vector<std::int64_t> other(d);
            bool inside = true;
            int l1 = 0;
            for (int a = 0; a < d; ++a) {
                other[a] = idx[a] + o[a];
                l1 += static_cast<int>(std::abs(o[a]));
                inside = inside && other[a] >= 0 && static_cast<std::size_t>(other[a]) < cfg.boxes_per_axis[a];
            }
            if (!inside) continue;
            const std::size_t c = grid.box_id(other);
            if (cfg.partial[c]) continue;
            BondRecord r;
            r.box_i = static_cast<std::uint32_t>(std::min(b, c));
            r.box_j = static_cast<std::uint32_t>(std::max(b, c));
            r.index_l1 = l1;
            r.k = box_distance_bound(l1, d, epsilon);
            r.both_good = cfg.good[b] && cfg.good[c];
            cfg.bonds.push_back(r);
        }
    }
    std::sort(cfg.bonds.begin(), cfg.bonds.end(), [](const BondRecord& x, const BondRecord& y) {
        return x.box_i != y.box_i ? x.box_i < y.box_i : x.box_j < y.box_j;
    });
    for (std::size_t s = 0; s < cfg.bonds.size(); ++s) {
        slot[(static_cast<std::uint64_t>(cfg.bonds[s].box_i) << 32) | cfg.bonds[s].box_j] = s;
    }
    for (const auto& [i, j] : edges.pairs) {
        const auto bi = grid.box_of_point(i);
        const auto bj = grid.box_of_point(j);
        if (bi == bj || !grid.in_designated_cluster(i) || !grid.in_designated_cluster(j)) continue;
        const auto key = (static_cast<std::uint64_t>(std::min(bi, bj)) << 32) | std::max(bi, bj);
        auto it = slot.find(key);
        if (it != slot.end() && cfg.bonds[it->second].both_good) cfg.bonds[it->second].open = true;
    }
    return cfg;
}

double coarse_largest_fraction(const CoarseConfig& config) {
    const std::size_t nb = config.good.size();
    const std::size_t full = config.full_boxes();
    if (full == 0) throw std::invalid_argument("coarse_largest_fraction: no full boxes");
    DisjointSets sets(nb);
    for (const auto& b : config.bonds) {
        if (b.open) sets.unite(b.box_i, b.box_j);
    }
    std::vector<std::size_t> size(nb, 0);
    std::size_t best = 0;
    for (std::size_t b = 0; b < nb; ++b) {
        if (!config.good[b]) continue;
        best = std::max(best, ++size[sets.find(b)]);
    }
    return static_cast<double>(best) / static_cast<double>(full);
}

namespace {

std::vector<BondFrequency> bond_frequencies(const std::vector<CoarseConfig>& configs, bool by_k) {
    std::map<int, BondFrequency> acc;
    for (const auto& c : configs) {
        for (const auto& b : c.bonds) {
            if (!b.both_good) continue;
            const int key = by_k ? b.k : b.index_l1;
            auto& f = acc[key];
            f.distance = key;
            ++f.trials;
            if (b.open) ++f.open;
        }
    }
    std::vector<BondFrequency> out;
    for (const auto& [key, f] : acc) out.push_back(f);
    return out;
}

}  // namespace

std::vector<BondFrequency> bond_frequencies_by_index(const std::vector<CoarseConfig>& configs) {
    return bond_frequencies(configs, false);
}

std::vector<BondFrequency> bond_frequencies_by_k(const std::vector<CoarseConfig>& configs) {
    return bond_frequencies(configs, true);
}

double site_frequency(const std::vector<CoarseConfig>& configs) {
    std::size_t full = 0, good = 0;
    for (const auto& c : configs) {
        full += c.full_boxes();
        good += c.good_boxes();
    }
    return full ? static_cast<double>(good) / static_cast<double>(full) : 0.0;
}

DominationReport domination_report(const std::vector<CoarseConfig>& configs, const DominationParams& params) {
    std::size_t full = 0, good = 0;
    for (const auto& c : configs) {
        full += c.full_boxes();
        good += c.good_boxes();
    }
    if (configs.empty() || full == 0) throw std::invalid_argument("domination_report: empty configuration");

    DominationReport rep;
    rep.mode = params.mode;
    rep.site_frequency = static_cast<double>(good) / static_cast<double>(full);
    const auto bonds = bond_frequencies_by_index(configs);

    if (params.mode == DominationMode::long_range) {
        const double alpha = configs.front().alpha;
        rep.cells.push_back(make_cell("site", full, good, params.mu1));
        for (const auto& f : bonds) {
            rep.cells.push_back(make_cell("bond m=" + std::to_string(f.distance), f.trials, f.open,
                                          -std::expm1(-params.lambda1 / std::pow(f.distance, alpha))));
        }
        if (bonds.empty()) rep.cells.push_back(make_cell("bond", 0, 0, 0.0));
    } else {
        FrequencyCell c;
        c.label = "adjacent bond x site";
        c.reference = params.p_c;
        const BondFrequency* adj = nullptr;
        for (const auto& f : bonds) {
            if (f.distance == 1) adj = &f;
        }
        c.trials = adj ? adj->trials : 0;
        c.successes = adj ? adj->open : 0;
        if (adj && adj->trials > 0) {
            const double b = adj->frequency();
            const double s = rep.site_frequency;
            const double sb = stats::binomial_sigma(b, adj->trials);
            const double ss = stats::binomial_sigma(s, full);
            c.frequency = b * s;
            c.sigma = std::sqrt(b * b * ss * ss + s * s * sb * sb);
            c.lower99 = c.frequency - kZ99 * c.sigma;
            c.pass = c.lower99 > params.p_c;
        }
        rep.cells.push_back(c);
    }
    rep.all_pass = std::all_of(rep.cells.begin(), rep.cells.end(), [](const FrequencyCell& c) { return c.pass; });
    return rep;
}

}  // namespace rcm
