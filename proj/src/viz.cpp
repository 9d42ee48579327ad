#include "taskmap/viz.hpp"

#include "taskmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

namespace taskmap::viz {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kHexRadius = 1.0 / kSqrt3; // adjacent cells share edges
constexpr double kScale = 60.0;             // px per lattice unit
constexpr double kMargin = 24.0;
constexpr double kTitleBand = 34.0;
constexpr double kLegendBand = 92.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

// Cell polygon in lattice units, centered on the node position. Hexagons
// are the Voronoi cells of the triangular lattice (vertex up, flat sides
// toward the horizontal neighbors); squares for the rectangular lattice.
std::vector<som::Point> cell_polygon(const som::SomMap& map, int node) {
    const som::Point c = map.positions[static_cast<std::size_t>(node)];
    std::vector<som::Point> pts;
    if (map.config.lattice == som::Lattice::hexagonal) {
        for (int k = 0; k < 6; ++k) {
            const double angle = (30.0 + 60.0 * k) * 3.141592653589793238462643383279502884 / 180.0;
            pts.push_back({c.x + kHexRadius * std::cos(angle), c.y + kHexRadius * std::sin(angle)});
        }
    } else {
        pts.push_back({c.x - 0.5, c.y - 0.5});
        pts.push_back({c.x + 0.5, c.y - 0.5});
        pts.push_back({c.x + 0.5, c.y + 0.5});
        pts.push_back({c.x - 0.5, c.y + 0.5});
    }
    return pts;
}

struct Layout {
    double min_x = 0, min_y = 0;
    double width_px = 0, height_px = 0;
    double map_right_px = 0;

    double tx(double x) const { return kMargin + (x - min_x) * kScale; }
    double ty(double y) const { return kTitleBand + kMargin + (y - min_y) * kScale; }
};

Layout compute_layout(const som::SomMap& map, bool with_legend) {
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (int i = 0; i < map.node_count(); ++i)
        for (const auto& p : cell_polygon(map, i)) {
            min_x = std::min(min_x, p.x);
            min_y = std::min(min_y, p.y);
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
    Layout l;
    l.min_x = min_x;
    l.min_y = min_y;
    l.map_right_px = kMargin + (max_x - min_x) * kScale + kMargin;
    l.width_px = l.map_right_px + (with_legend ? kLegendBand : 0.0);
    l.height_px = kTitleBand + kMargin + (max_y - min_y) * kScale + kMargin;
    return l;
}

std::string polygon_points(const Layout& l, const std::vector<som::Point>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out.push_back(' ');
        out += fmt(l.tx(pts[i].x));
        out.push_back(',');
        out += fmt(l.ty(pts[i].y));
    }
    return out;
}

void append_cells(std::ostringstream& svg, const som::SomMap& map, const Layout& l,
                  const std::vector<std::string>& fills) {
    svg << "<g stroke=\"#888888\" stroke-width=\"0.5\">\n";
    for (int i = 0; i < map.node_count(); ++i)
        svg << "<polygon points=\"" << polygon_points(l, cell_polygon(map, i)) << "\" fill=\""
            << fills[static_cast<std::size_t>(i)] << "\"/>\n";
    svg << "</g>\n";
}

// The shared edge between two adjacent cells: through the midpoint,
// perpendicular to the center line, as long as one polygon side.
void append_boundaries(std::ostringstream& svg, const som::SomMap& map, const Layout& l,
                       const std::vector<int>& labels) {
    const double edge =
        map.config.lattice == som::Lattice::hexagonal ? kHexRadius : 1.0;
    svg << "<g stroke=\"#1a1a1a\" stroke-width=\"2.2\" stroke-linecap=\"round\">\n";
    for (int a = 0; a < map.node_count(); ++a) {
        for (int b = a + 1; b < map.node_count(); ++b) {
            if (!som::lattice_adjacent(map, a, b)) continue;
            if (labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)]) continue;
            const som::Point pa = map.positions[static_cast<std::size_t>(a)];
            const som::Point pb = map.positions[static_cast<std::size_t>(b)];
            const double mx = 0.5 * (pa.x + pb.x), my = 0.5 * (pa.y + pb.y);
            double dx = pb.x - pa.x, dy = pb.y - pa.y;
            const double len = std::sqrt(dx * dx + dy * dy);
            dx /= len;
            dy /= len;
            const double px = -dy, py = dx; // unit perpendicular
            svg << "<line x1=\"" << fmt(l.tx(mx - px * edge / 2.0)) << "\" y1=\""
                << fmt(l.ty(my - py * edge / 2.0)) << "\" x2=\"" << fmt(l.tx(mx + px * edge / 2.0))
                << "\" y2=\"" << fmt(l.ty(my + py * edge / 2.0)) << "\"/>\n";
        }
    }
    svg << "</g>\n";
}

void append_cluster_labels(std::ostringstream& svg, const som::SomMap& map, const Layout& l,
                           const cluster::ClusterAssignment& clusters) {
    svg << "<g font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\" fill=\"#111111\" "
           "text-anchor=\"middle\">\n";
    for (int label = 1; label <= clusters.k; ++label) {
        double sx = 0.0, sy = 0.0;
        int cnt = 0;
        for (int i = 0; i < map.node_count(); ++i)
            if (clusters.node_to_cluster[static_cast<std::size_t>(i)] == label) {
                sx += map.positions[static_cast<std::size_t>(i)].x;
                sy += map.positions[static_cast<std::size_t>(i)].y;
                ++cnt;
            }
        if (cnt == 0) continue;
        svg << "<text x=\"" << fmt(l.tx(sx / cnt)) << "\" y=\"" << fmt(l.ty(sy / cnt) + 5.0)
            << "\">C" << label << "</text>\n";
    }
    svg << "</g>\n";
}

void append_legend(std::ostringstream& svg, const Layout& l, double vmin, double vmed,
                   double vmax) {
    const double bar_x = l.map_right_px + 14.0;
    const double bar_y = kTitleBand + kMargin;
    const double bar_h = l.height_px - bar_y - kMargin;
    const double bar_w = 16.0;
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#111111\">\n";
    svg << "<rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(bar_y) << "\" width=\"" << fmt(bar_w)
        << "\" height=\"" << fmt(bar_h) << "\" fill=\"url(#heat-scale)\" stroke=\"#555555\" "
           "stroke-width=\"0.5\"/>\n";
    const double tx = bar_x + bar_w + 5.0;
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(bar_y + 4.0) << "\">" << fmt_value(vmax)
        << "</text>\n";
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(bar_y + bar_h / 2.0 + 4.0) << "\">"
        << fmt_value(vmed) << "</text>\n";
    svg << "<text x=\"" << fmt(tx) << "\" y=\"" << fmt(bar_y + bar_h + 4.0) << "\">"
        << fmt_value(vmin) << "</text>\n";
    svg << "</g>\n";
}

std::string document_open(const Layout& l, const std::string& title) {
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(l.width_px)
        << "\" height=\"" << fmt(l.height_px) << "\" viewBox=\"0 0 " << fmt(l.width_px) << " "
        << fmt(l.height_px) << "\">\n";
    svg << "<title>" << escape_xml(title) << "</title>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(l.width_px) << "\" height=\""
        << fmt(l.height_px) << "\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kTitleBand - 10.0)
        << "\" font-family=\"sans-serif\" font-size=\"16\" fill=\"#111111\">" << escape_xml(title)
        << "</text>\n";
    return svg.str();
}

} // namespace

Rgb heat_color(double f) {
    f = std::min(1.0, std::max(0.0, f));
    Rgb c;
    if (f <= 0.5) {
        const double t = f / 0.5;
        c.r = 0;
        c.g = static_cast<int>(std::lround(255.0 * t));
        c.b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    } else {
        const double t = (f - 0.5) / 0.5;
        c.r = static_cast<int>(std::lround(255.0 * t));
        c.g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
        c.b = 0;
    }
    return c;
}

std::string hex_color(const Rgb& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

namespace {

Rgb hsv_to_rgb(double h, double s, double v) {
    h = std::fmod(h, 360.0);
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
    const double m = v - c;
    double r = 0, g = 0, b = 0;
    if (h < 60) { r = c; g = x; }
    else if (h < 120) { r = x; g = c; }
    else if (h < 180) { g = c; b = x; }
    else if (h < 240) { g = x; b = c; }
    else if (h < 300) { r = x; b = c; }
    else { r = c; b = x; }
    return {static_cast<int>(std::lround(255.0 * (r + m))),
            static_cast<int>(std::lround(255.0 * (g + m))),
            static_cast<int>(std::lround(255.0 * (b + m)))};
}

} // namespace

std::vector<Rgb> category_palette(int k) {
    std::vector<Rgb> out;
    std::set<std::tuple<int, int, int>> used;
    for (int i = 0; i < k; ++i) {
        const double hue = 360.0 * i / std::max(1, k);
        double value = 0.88;
        Rgb c = hsv_to_rgb(hue, 0.62, value);
        while (used.count({c.r, c.g, c.b}) && value > 0.2) {
            value -= 0.03;
            c = hsv_to_rgb(hue, 0.62, value);
        }
        used.insert({c.r, c.g, c.b});
        out.push_back(c);
    }
    return out;
}

std::string render_component_map(const som::SomMap& map, std::span<const double> node_values,
                                 const cluster::ClusterAssignment* clusters,
                                 const std::string& title) {
    if (static_cast<int>(node_values.size()) != map.node_count())
        fail("LengthMismatch", "render_component_map: " + std::to_string(node_values.size()) +
                                   " values for " + std::to_string(map.node_count()) + " nodes");
    if (clusters && static_cast<int>(clusters->node_to_cluster.size()) != map.node_count())
        fail("Mismatch", "render_component_map: cluster assignment does not match the map");

    std::vector<double> sorted(node_values.begin(), node_values.end());
    std::sort(sorted.begin(), sorted.end());
    const double vmin = sorted.front();
    const double vmax = sorted.back();
    const std::size_t m = sorted.size();
    const double vmed = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

    std::vector<std::string> fills;
    fills.reserve(node_values.size());
    for (double v : node_values) {
        const double f = vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5;
        fills.push_back(hex_color(heat_color(f)));
    }

    const Layout l = compute_layout(map, true);
    std::ostringstream svg;
    svg << document_open(l, title);
    svg << "<defs>\n<linearGradient id=\"heat-scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n"
        << "<stop offset=\"0\" stop-color=\"#0000ff\"/>\n"
        << "<stop offset=\"0.5\" stop-color=\"#00ff00\"/>\n"
        << "<stop offset=\"1\" stop-color=\"#ff0000\"/>\n"
        << "</linearGradient>\n</defs>\n";
    append_cells(svg, map, l, fills);
    if (clusters) append_boundaries(svg, map, l, clusters->node_to_cluster);
    append_legend(svg, l, vmin, vmed, vmax);
    svg << "</svg>\n";
    return svg.str();
}

std::string render_cluster_map(const som::SomMap& map, const cluster::ClusterAssignment& clusters,
                               const std::string& title) {
    if (static_cast<int>(clusters.node_to_cluster.size()) != map.node_count())
        fail("Mismatch", "render_cluster_map: cluster assignment does not match the map");

    const auto palette = category_palette(clusters.k);
    std::vector<std::string> fills;
    fills.reserve(clusters.node_to_cluster.size());
    for (int label : clusters.node_to_cluster)
        fills.push_back(hex_color(palette[static_cast<std::size_t>(label - 1)]));

    const Layout l = compute_layout(map, false);
    std::ostringstream svg;
    svg << document_open(l, title);
    append_cells(svg, map, l, fills);
    append_boundaries(svg, map, l, clusters.node_to_cluster);
    append_cluster_labels(svg, map, l, clusters);
    svg << "</svg>\n";
    return svg.str();
}

} // namespace taskmap::viz
