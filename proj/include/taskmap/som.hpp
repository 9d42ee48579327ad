#pragma once

#include "taskmap/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace taskmap::som {

enum class Lattice { hexagonal, rectangular };
enum class InitMethod { pca_plane, random_uniform };

std::string to_string(Lattice l);
std::string to_string(InitMethod m);
std::optional<Lattice> parse_lattice(std::string_view s);
std::optional<InitMethod> parse_init(std::string_view s);

struct SomConfig {
    int rows = 0;            // 0 = auto-size from the data
    int cols = 0;
    Lattice lattice = Lattice::hexagonal;
    int epochs = 50;
    double sigma0 = 0.0;     // 0 = max(rows, cols) / 2
    double sigma_final = 0.5;
    InitMethod init = InitMethod::random_uniform;
    std::uint64_t seed = 0;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct SomMap {
    SomConfig config; // resolved: rows, cols, sigma0 filled in
    std::vector<std::string> feature_names;
    std::vector<Point> positions;                 // fixed by lattice geometry
    std::vector<std::vector<double>> prototypes;  // node-major, dimension d
    bool trained = false;

    int node_count() const { return static_cast<int>(prototypes.size()); }
    int dim() const { return prototypes.empty() ? 0 : static_cast<int>(prototypes.front().size()); }
    int node_index(int r, int c) const { return r * config.cols + c; }
};

// Hexagonal: node (r,c) at (c + 0.5*(r mod 2), r*sqrt(3)/2); rectangular at (c, r).
Point lattice_position(Lattice lattice, int row, int col);
double lattice_distance(const SomMap& map, int node_a, int node_b);
bool lattice_adjacent(const SomMap& map, int node_a, int node_b); // distance <= 1.01

// ~5*sqrt(N) nodes, grid aspect from the ratio of the two largest
// data-covariance eigenvalues.
std::pair<int, int> auto_map_size(const model::FeatureMatrix& data);

// pca_plane: prototypes interpolated across the plane of the top two
// principal components (deterministic, seed-independent); random: i.i.d.
// per-feature uniform over the empirical min-max, reproducible from seed.
// A degenerate covariance falls back to random init with a warning.
SomMap init_map(SomConfig config, const model::FeatureMatrix& data,
                std::vector<std::string>* warnings = nullptr);

int find_bmu(const SomMap& map, std::span<const double> v);

struct TrainTrace {
    std::vector<double> sigma_per_epoch;
    std::vector<double> qe_per_epoch; // quantization error after each epoch
};

// Batch training: per epoch, assign every record to its BMU, then set each
// prototype to the Gaussian-neighborhood weighted mean. sigma decays
// exponentially from sigma0 to sigma_final. Deterministic and
// bit-reproducible for a fixed (config, seed, data).
SomMap train_batch(const SomMap& map, const model::FeatureMatrix& data,
                   TrainTrace* trace = nullptr);

double quantization_error(const SomMap& map, const model::FeatureMatrix& data);

// Fraction of records whose best and second-best nodes are not adjacent.
double topographic_error(const SomMap& map, const model::FeatureMatrix& data);

// Per-node mean of `values` over the records mapped there; empty nodes are
// filled with the mean of adjacent filled nodes, iterated until full.
std::vector<double> project_attribute(const SomMap& map, const model::FeatureMatrix& data,
                                      std::span<const double> values);

std::string to_json(const SomMap& map);
SomMap som_map_from_json(const std::string& text);
void save_som_map(const SomMap& map, const std::string& path);
SomMap load_som_map(const std::string& path);

} // namespace taskmap::som
