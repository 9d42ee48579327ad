#pragma once

#include "taskmap/model.hpp"
#include "taskmap/som.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace taskmap::cluster {

struct MergeStep {
    double cost = 0.0;   // Ward cost of the merge
    int repr_a = 0;      // min node index of each side, repr_a < repr_b
    int repr_b = 0;
    int clusters_after = 0;
};

struct ClusterAssignment {
    int k = 1;
    std::vector<int> node_to_cluster; // labels 1..k, first-seen node order
    std::vector<MergeStep> merge_trace;
};

// Agglomerative Ward clustering of node prototypes, merges restricted to
// lattice-contiguous cluster pairs. Prototypes are unweighted by default;
// node_weights (e.g. record counts per node) switches to weighted means.
// When k is omitted it is picked by the largest relative jump in merge cost
// within [2, min(15, ceil(nodes/4))].
ClusterAssignment som_ward_cluster(const som::SomMap& map, std::optional<int> k = {},
                                   const std::vector<double>* node_weights = nullptr);

// Record label = cluster of its BMU node.
std::vector<int> assign_records(const som::SomMap& map, const ClusterAssignment& clusters,
                                const model::FeatureMatrix& data);

struct ClusterProfile {
    int label = 0;
    std::size_t size = 0;
    std::vector<double> feature_mean;
    std::vector<double> feature_median;
    std::vector<double> extra_mean;
};

std::vector<ClusterProfile> cluster_profiles(
    const std::vector<int>& labels, const model::FeatureMatrix& features,
    const std::vector<std::pair<std::string, std::vector<double>>>& extra = {});

std::string to_json(const ClusterAssignment& a);
ClusterAssignment cluster_assignment_from_json(const std::string& text);
void save_cluster_assignment(const ClusterAssignment& a, const std::string& path);
ClusterAssignment load_cluster_assignment(const std::string& path);

} // namespace taskmap::cluster
