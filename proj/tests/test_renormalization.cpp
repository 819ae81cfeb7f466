#include "rcm/renormalization.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace rcm;

namespace {

EdgeList hand_edges(std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs, std::size_t n) {
    EdgeList e;
    e.pairs = std::move(pairs);
    e.spec = ConnectionSpec::polynomial_tail(2, 3.0);
    e.point_count = n;
    return e;
}

}  // namespace

TEST_CASE("empty cloud gives empty boxes") {
    const PointCloud empty(Region::unit_cube(2, 2.0), {}, false, {});
    const auto grid = partition_boxes(empty, hand_edges({}, 0), 0.5);
    CHECK(grid.box_count() == 4);
    for (std::size_t b = 0; b < grid.box_count(); ++b) {
        CHECK(grid.points_in(b).empty());
        CHECK(grid.largest_cluster(b) == 0);
        CHECK_FALSE(good_box(grid, b, 1));
    }
    const auto coarse = coarse_graph(empty, hand_edges({}, 0), 0.5, 1, 3);
    CHECK(coarse.good_boxes() == 0);
    for (const auto& b : coarse.bonds) CHECK_FALSE(b.open);
    CHECK(coarse_largest_fraction(coarse) == 0.0);
}

TEST_CASE("box membership conserves points") {
    const auto cloud = sample_poisson(Region::unit_cube(2, 3.0), 40.0, {2, 0});
    const auto edges = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, 3.0), {2, 1});
    const auto grid = partition_boxes(cloud, edges, 0.25);
    CHECK(grid.boxes_per_axis() == std::vector<std::size_t>{6, 6});
    std::size_t total = 0;
    for (std::size_t b = 0; b < grid.box_count(); ++b) {
        total += grid.points_in(b).size();
        const auto idx = grid.box_index(b);
        CHECK(grid.box_id(idx) == b);
        for (auto p : grid.points_in(b)) {
            CHECK(grid.box_of_point(p) == b);
            for (int a = 0; a < 2; ++a) CHECK(static_cast<std::int64_t>(std::floor(cloud.point(p)[a] / 0.5)) == idx[a]);
        }
        std::size_t in_clusters = 0;
        for (auto s : grid.cluster_sizes(b)) in_clusters += s;
        CHECK(in_clusters == grid.points_in(b).size());
    }
    CHECK(total == cloud.size());
    CHECK_THROWS_AS(partition_boxes(cloud, edges, 2.0), std::invalid_argument);
}

TEST_CASE("good boxes on a hand-built cloud") {
    // Box (0,0) holds a 3-point chain; box (1,0) holds two unjoined points.
    const std::vector<double> xy{0.1, 0.1, 0.2, 0.2, 0.3, 0.1, 1.2, 0.2, 1.8, 0.8};
    const PointCloud cloud(Region::unit_cube(2, 2.0), xy, false, {});
    const auto edges = hand_edges({{0, 1}, {1, 2}, {2, 3}}, 5);
    const auto grid = partition_boxes(cloud, edges, 0.5);
    const std::size_t b00 = grid.box_id({0, 0});
    const std::size_t b10 = grid.box_id({1, 0});
    CHECK(grid.cluster_sizes(b00) == std::vector<std::size_t>{3});
    CHECK(grid.cluster_sizes(b10) == std::vector<std::size_t>{1, 1});
    CHECK(good_box(grid, b00, 3));
    CHECK_FALSE(good_box(grid, b00, 4));
    CHECK(good_box(grid, b10, 1));
    CHECK_FALSE(good_box(grid, b10, 2));
    // Tie between singletons goes to the smaller point index.
    CHECK(grid.in_designated_cluster(3));
    CHECK_FALSE(grid.in_designated_cluster(4));
    CHECK_THROWS_AS(good_box(grid, b00, 0), std::invalid_argument);
    CHECK_THROWS_AS(good_box(grid, 99, 1), std::out_of_range);

    const auto coarse = coarse_graph(cloud, edges, 0.5, 1, 3);
    bool found = false;
    for (const auto& b : coarse.bonds) {
        if (b.box_i == b00 && b.box_j == b10) {
            found = true;
            CHECK(b.index_l1 == 1);
            CHECK(b.both_good);
            CHECK(b.open);  // edge 2-3 joins the designated clusters
        }
    }
    CHECK(found);
    const auto strict = coarse_graph(cloud, edges, 0.5, 2, 3);
    for (const auto& b : strict.bonds) CHECK_FALSE(b.open);
}

TEST_CASE("partial boxes are never good") {
    const auto cloud = sample_poisson(Region::unit_cube(2, 2.5), 60.0, {3, 0});
    const auto edges = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, 3.0), {3, 1});
    const auto grid = partition_boxes(cloud, edges, 0.5);
    CHECK(grid.boxes_per_axis() == std::vector<std::size_t>{3, 3});
    const auto coarse = coarse_graph(cloud, edges, 0.5, 1, 3);
    CHECK(coarse.full_boxes() == 4);
    for (std::size_t b = 0; b < grid.box_count(); ++b) {
        const auto idx = grid.box_index(b);
        CHECK(grid.partial(b) == (idx[0] == 2 || idx[1] == 2));
        if (coarse.partial[b]) CHECK_FALSE(coarse.good[b]);
    }
}

TEST_CASE("adding edges only adds good boxes") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto cloud = sample_poisson(Region::unit_cube(2, 2.0), 30.0, {10 + s, 0});
        const auto full = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, 3.0), {10 + s, 1});
        auto thin = full;
        thin.pairs.clear();
        for (std::size_t k = 0; k < full.pairs.size(); k += 2) thin.pairs.push_back(full.pairs[k]);
        const auto a = partition_boxes(cloud, thin, 0.25);
        const auto b = partition_boxes(cloud, full, 0.25);
        for (std::size_t box = 0; box < a.box_count(); ++box) {
            CHECK(a.largest_cluster(box) <= b.largest_cluster(box));
            for (int beta : {2, 4, 8}) {
                if (good_box(a, box, beta)) CHECK(good_box(b, box, beta));
            }
        }
    }
}

TEST_CASE("bond bound values") {
    CHECK(lemma_tr2_bound(5, 2.0, 3.0) == doctest::Approx(0.956063).epsilon(1e-6));
    CHECK(lemma_tr2_bound(1, 1.0, 3.0) == doctest::Approx(0.632121).epsilon(1e-6));
    CHECK(lemma_tr2_bound(3, INFINITY, 3.0) == 0.0);
    CHECK(lemma_tr2_bound(3, 1e6, 3.0) < 1e-12);
    CHECK(lemma_tr2_bound(3, 2.0, 3.0) < lemma_tr2_bound(4, 2.0, 3.0));
    CHECK(box_distance_bound(1, 2, 1.0 / 6.0) == 1);
    CHECK(box_distance_bound(2, 2, 1.0 / 6.0) == 2);
    CHECK(box_distance_bound(4, 2, 1.0 / 6.0) == 2);
    CHECK(box_distance_bound(5, 2, 1.0 / 6.0) == 3);
    CHECK(box_distance_bound(1, 2, 0.5) == 3);
}

TEST_CASE("box distance bound dominates point distances") {
    Rng rng(substream({5, 0}, "bound", 0));
    const double eps = 0.3;
    for (int t = 0; t < 20000; ++t) {
        std::int64_t i[2], j[2];
        double dist = 0.0;
        int m = 0;
        for (int a = 0; a < 2; ++a) {
            i[a] = static_cast<std::int64_t>(rng.index(6));
            j[a] = static_cast<std::int64_t>(rng.index(6));
            m += static_cast<int>(std::abs(i[a] - j[a]));
            const double x = 2 * eps * (static_cast<double>(i[a]) + rng.uniform());
            const double y = 2 * eps * (static_cast<double>(j[a]) + rng.uniform());
            dist += std::abs(x - y);
        }
        CHECK(dist <= box_distance_bound(m, 2, eps));
    }
}

TEST_CASE("coarse configuration is a function of the snapshot") {
    const auto cloud = sample_poisson(Region::unit_cube(2, 3.0), 50.0, {6, 0});
    const auto edges = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, 3.0), {6, 1});
    const auto a = coarse_graph(cloud, edges, 0.25, 4, 3);

    std::stringstream ps, es;
    write_points(ps, cloud);
    write_edges(es, edges);
    const auto cloud2 = read_points(ps);
    const auto edges2 = read_edges(es, cloud2.size());
    const auto b = coarse_graph(cloud2, edges2, 0.25, 4, 3);
    CHECK(a.good == b.good);
    REQUIRE(a.bonds.size() == b.bonds.size());
    for (std::size_t k = 0; k < a.bonds.size(); ++k) {
        CHECK(a.bonds[k].box_i == b.bonds[k].box_i);
        CHECK(a.bonds[k].box_j == b.bonds[k].box_j);
        CHECK(a.bonds[k].open == b.bonds[k].open);
    }
}

TEST_CASE("open bonds match a brute-force check") {
    const auto cloud = sample_poisson(Region::unit_cube(2, 3.0), 30.0, {7, 0});
    const auto edges = sample_edges(cloud, ConnectionSpec::polynomial_tail(2, 3.0), {7, 1});
    const auto grid = partition_boxes(cloud, edges, 0.25);
    const auto c = coarse_graph(cloud, edges, 0.25, 3, 3);
    for (const auto& b : c.bonds) {
        CHECK(b.k <= 3);
        CHECK(b.k == box_distance_bound(b.index_l1, 2, 0.25));
        CHECK(b.both_good == (c.good[b.box_i] && c.good[b.box_j]));
        bool joined = false;
        for (auto [u, v] : edges.pairs) {
            const auto bu = grid.box_of_point(u);
            const auto bv = grid.box_of_point(v);
            const bool pair = (bu == b.box_i && bv == b.box_j) || (bu == b.box_j && bv == b.box_i);
            if (pair && grid.in_designated_cluster(u) && grid.in_designated_cluster(v)) joined = true;
        }
        CHECK(b.open == (b.both_good && joined));
    }
    for (std::size_t box = 0; box < grid.box_count(); ++box) CHECK(c.good[box] == (!grid.partial(box) && good_box(grid, box, 3)));
}

TEST_CASE("domination report bookkeeping") {
    CHECK_THROWS_AS(domination_report({}, {}), std::invalid_argument);

    CoarseConfig c;
    c.dim = 2;
    c.alpha = 3.0;
    c.good.assign(400, true);
    c.partial.assign(400, false);
    for (std::uint32_t b = 0; b + 1 < 400; ++b) c.bonds.push_back({b, b + 1, 1, 1, true, true});
    const auto rep = domination_report({c}, {DominationMode::long_range, 1.0, 0.5, 0.5});
    CHECK(rep.site_frequency == 1.0);
    REQUIRE(rep.cells.size() == 2);
    CHECK(rep.cells[1].trials == 399);
    CHECK(rep.all_pass);

    c.good.assign(400, false);
    for (auto& b : c.bonds) b.both_good = b.open = false;
    const auto bad = domination_report({c}, {DominationMode::long_range, 1.0, 0.5, 0.5});
    CHECK(bad.site_frequency == 0.0);
    CHECK_FALSE(bad.all_pass);
    const auto nn = domination_report({c}, {DominationMode::nearest_neighbor, 1.0, 0.5, 0.2});
    CHECK_FALSE(nn.all_pass);
}

TEST_CASE("three-dimensional nearest-neighbour domination") {
    const auto spec = ConnectionSpec::polynomial_tail(3, 4.0);
    std::vector<CoarseConfig> configs;
    for (std::uint64_t r = 0; r < 2; ++r) {
        const auto cloud = sample_poisson(Region::unit_cube(3, 2.4), 200.0, {40 + r, 0});
        const auto edges = sample_edges(cloud, spec, {40 + r, 1});
        configs.push_back(coarse_graph(cloud, edges, 0.2, 3, 2));
    }
    const auto rep = domination_report(configs, {DominationMode::nearest_neighbor, 1.0, 0.5, 0.2488});
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.cells[0].trials > 500);
    CHECK(rep.cells[0].lower99 > 0.2488);
    CHECK(rep.all_pass);
}
