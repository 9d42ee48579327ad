#pragma once

#include "taskmap/cluster.hpp"
#include "taskmap/som.hpp"

#include <span>
#include <string>

namespace taskmap::viz {

struct Rgb {
    int r = 0, g = 0, b = 0;
};

// Blue -> green -> red over f in [0,1]; linear between the anchors
// f=0 (0,0,255), f=0.5 (0,255,0), f=1 (255,0,0).
Rgb heat_color(double f);
std::string hex_color(const Rgb& c);

// Categorical palette of k distinct colors, deterministic order.
std::vector<Rgb> category_palette(int k);

// One SVG document per map. Byte output is a pure function of the inputs:
// fixed 4-decimal coordinates, fixed element order.
std::string render_component_map(const som::SomMap& map, std::span<const double> node_values,
                                 const cluster::ClusterAssignment* clusters,
                                 const std::string& title);

std::string render_cluster_map(const som::SomMap& map, const cluster::ClusterAssignment& clusters,
                               const std::string& title = "Cluster map");

} // namespace taskmap::viz
