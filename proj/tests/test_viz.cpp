#include <doctest.h>

#include "taskmap/cluster.hpp"
#include "taskmap/errors.hpp"
#include "taskmap/som.hpp"
#include "taskmap/viz.hpp"

#include "test_support.hpp"

#include <filesystem>

using namespace taskmap;

namespace {

som::SomMap grid_map(int rows, int cols, som::Lattice lattice = som::Lattice::hexagonal) {
    som::SomMap map;
    map.config.rows = rows;
    map.config.cols = cols;
    map.config.lattice = lattice;
    map.config.sigma0 = 1.0;
    map.config.sigma_final = 0.5;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            map.positions.push_back(som::lattice_position(lattice, r, c));
    map.prototypes.assign(static_cast<std::size_t>(rows * cols), {0.0});
    map.feature_names = {"f"};
    map.trained = true;
    return map;
}

} // namespace

TEST_CASE("heat scale anchors and midpoint") {
    CHECK(viz::hex_color(viz::heat_color(0.0)) == "#0000ff");
    CHECK(viz::hex_color(viz::heat_color(0.5)) == "#00ff00");
    CHECK(viz::hex_color(viz::heat_color(1.0)) == "#ff0000");
}

TEST_CASE("heat scale is monotone in each segment") {
    int prev_g = -1, prev_b = 256;
    for (int i = 0; i <= 100; ++i) {
        const auto c = viz::heat_color(0.005 * i); // f in [0, 0.5]
        CHECK(c.r == 0);
        CHECK(c.g >= prev_g);
        CHECK(c.b <= prev_b);
        prev_g = c.g;
        prev_b = c.b;
    }
    int prev_r = -1;
    prev_g = 256;
    for (int i = 0; i <= 100; ++i) {
        const auto c = viz::heat_color(0.5 + 0.005 * i); // f in [0.5, 1]
        CHECK(c.b == 0);
        CHECK(c.r >= prev_r);
        CHECK(c.g <= prev_g);
        prev_r = c.r;
        prev_g = c.g;
    }
}

TEST_CASE("component map: constant values render the degenerate green") {
    auto map = grid_map(2, 3);
    const std::vector<double> values(6, 4.2);
    const auto svg = viz::render_component_map(map, values, nullptr, "flat");
    CHECK(testsup::xml_well_formed(svg));
    for (const auto& fill : testsup::polygon_fills(svg)) CHECK(fill == "#00ff00");
}

TEST_CASE("component map: extremes get the anchor colors") {
    auto map = grid_map(1, 3);
    const std::vector<double> values = {-2.0, 0.0, 6.0};
    const auto svg = viz::render_component_map(map, values, nullptr, "extremes");
    const auto fills = testsup::polygon_fills(svg);
    REQUIRE(fills.size() == 3);
    CHECK(fills[0] == "#0000ff");
    CHECK(fills[2] == "#ff0000");
}

TEST_CASE("component map: 2x2 interpolation is hand-checkable and golden-stable") {
    auto map = grid_map(2, 2);
    const std::vector<double> values = {0.0, 1.0, 2.0, 3.0};
    const auto svg = viz::render_component_map(map, values, nullptr, "2x2 ramp");
    const auto fills = testsup::polygon_fills(svg);
    REQUIRE(fills.size() == 4);
    // f = v/3: 0 -> blue; 1/3 -> g=170,b=85; 2/3 -> r=85,g=170; 1 -> red
    CHECK(fills[0] == "#0000ff");
    CHECK(fills[1] == "#00aa55");
    CHECK(fills[2] == "#55aa00");
    CHECK(fills[3] == "#ff0000");

    CHECK(svg == viz::render_component_map(map, values, nullptr, "2x2 ramp"));

    const std::string golden_path =
        std::string(TASKMAP_SOURCE_DIR) + "/tests/golden/component_2x2.svg";
    REQUIRE(std::filesystem::exists(golden_path));
    CHECK(svg == testsup::read_file(golden_path));
}

TEST_CASE("component map: legend carries min, median, max of the data") {
    auto map = grid_map(1, 5);
    const std::vector<double> values = {1.0, 2.0, 3.0, 4.0, 100.0};
    const auto svg = viz::render_component_map(map, values, nullptr, "legend");
    CHECK(svg.find(">1<") != std::string::npos);
    CHECK(svg.find(">3<") != std::string::npos); // median
    CHECK(svg.find(">100<") != std::string::npos);
}

TEST_CASE("component map rejects wrong value count") {
    auto map = grid_map(2, 2);
    const std::vector<double> values = {1.0};
    try {
        viz::render_component_map(map, values, nullptr, "bad");
        FAIL("expected LengthMismatch");
    } catch (const DataError& e) {
        CHECK(e.kind() == "LengthMismatch");
    }
}

TEST_CASE("cluster map: degenerate and singleton partitions") {
    auto map = grid_map(2, 2);
    cluster::ClusterAssignment one;
    one.k = 1;
    one.node_to_cluster = {1, 1, 1, 1};
    const auto svg1 = viz::render_cluster_map(map, one);
    CHECK(testsup::xml_well_formed(svg1));
    const auto fills1 = testsup::polygon_fills(svg1);
    for (const auto& f : fills1) CHECK(f == fills1[0]);
    CHECK(svg1.find(">C1<") != std::string::npos);
    CHECK(svg1.find(">C2<") == std::string::npos);
    CHECK(svg1.find("<line") == std::string::npos); // no boundaries inside one cluster

    cluster::ClusterAssignment all;
    all.k = 4;
    all.node_to_cluster = {1, 2, 3, 4};
    const auto svg4 = viz::render_cluster_map(map, all);
    const auto fills4 = testsup::polygon_fills(svg4);
    REQUIRE(fills4.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) CHECK(fills4[i] != fills4[j]);
    for (int c = 1; c <= 4; ++c)
        CHECK(svg4.find(">C" + std::to_string(c) + "<") != std::string::npos);
}

TEST_CASE("cluster map: boundary segments exactly separate differing labels") {
    auto map = grid_map(3, 3);
    cluster::ClusterAssignment clusters;
    clusters.k = 2;
    clusters.node_to_cluster = {1, 1, 1, 1, 1, 2, 2, 2, 2};
    const auto svg = viz::render_cluster_map(map, clusters);
    CHECK(testsup::xml_well_formed(svg));
    std::size_t expected = 0;
    for (int a = 0; a < 9; ++a)
        for (int b = a + 1; b < 9; ++b)
            if (som::lattice_adjacent(map, a, b) &&
                clusters.node_to_cluster[static_cast<std::size_t>(a)] !=
                    clusters.node_to_cluster[static_cast<std::size_t>(b)])
                ++expected;
    std::size_t lines = 0;
    std::size_t pos = 0;
    while ((pos = svg.find("<line", pos)) != std::string::npos) {
        ++lines;
        pos += 5;
    }
    CHECK(lines == expected);
    CHECK(expected > 0);
}

TEST_CASE("rendering escapes XML special characters in titles") {
    auto map = grid_map(1, 2);
    const std::vector<double> values = {0.0, 1.0};
    const auto svg = viz::render_component_map(map, values, nullptr, "a < b & \"c\"");
    CHECK(testsup::xml_well_formed(svg));
    CHECK(svg.find("a &lt; b &amp; &quot;c&quot;") != std::string::npos);
}

TEST_CASE("rectangular lattice renders square cells, still well-formed") {
    auto map = grid_map(2, 2, som::Lattice::rectangular);
    const std::vector<double> values = {0, 1, 2, 3};
    cluster::ClusterAssignment clusters;
    clusters.k = 2;
    clusters.node_to_cluster = {1, 1, 2, 2};
    const auto svg = viz::render_component_map(map, values, &clusters, "rect");
    CHECK(testsup::xml_well_formed(svg));
    CHECK(testsup::polygon_fills(svg).size() == 4);
}

TEST_CASE("palette produces k distinct colors") {
    for (int k : {1, 2, 7, 30, 100}) {
        const auto palette = viz::category_palette(k);
        REQUIRE(palette.size() == static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < palette.size(); ++i)
            for (std::size_t j = i + 1; j < palette.size(); ++j) {
                const bool same = palette[i].r == palette[j].r &&
                                  palette[i].g == palette[j].g && palette[i].b == palette[j].b;
                CHECK_FALSE(same);
            }
    }
}
