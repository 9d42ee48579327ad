#pragma once

#include "taskmap/model.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace taskmap::gen {

// Target monotone strength (Kendall tau) for a named attribute/behavior
// pair. The generator supports (comment_count, developer_count) and
// (negemo, developer_count); order inside the pair does not matter.
struct Coupling {
    std::string a;
    std::string b;
    double strength = 0.0; // in [-1, 1]
};

std::vector<Coupling> default_couplings();

struct GenConfig {
    int n_items = 10215;
    int n_iterations = 30;
    double median_time_days = 35.0;
    double priority_min = 1.0;
    double priority_max = 4.0;
    int n_latent_clusters = 4;
    std::vector<Coupling> couplings = default_couplings();
    int words_per_message = 40;
    std::uint64_t seed = 0;
};

inline constexpr std::array<const char*, 6> kBehaviorCategories = {
    "social", "posemo", "negemo", "cogmech", "work", "achieve"};

struct GroundTruth {
    std::vector<std::string> item_ids;
    std::vector<int> latent_cluster;                 // 1-based
    std::vector<std::array<double, 6>> category_rates; // injected per-word rates
};

struct Generated {
    model::Dataset dataset;
    GroundTruth truth;
};

// Latent-cluster attribute model plus copula-style rank mixing for the
// planted couplings; fully reproducible from the seed.
Generated generate(const GenConfig& config);

// work_items.csv, messages.csv and ground_truth.csv under dir; byte
// deterministic for a fixed config.
void write_files(const Generated& g, const std::string& dir);

std::string ground_truth_csv(const GroundTruth& t);

} // namespace taskmap::gen
