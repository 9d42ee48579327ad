#pragma once

#include "taskmap/cluster.hpp"
#include "taskmap/gen.hpp"
#include "taskmap/lexicon.hpp"
#include "taskmap/model.hpp"
#include "taskmap/som.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace taskmap::report {

struct RunConfig {
    std::optional<std::string> work_item_path;
    std::optional<std::string> message_path;
    std::optional<gen::GenConfig> generate; // when set, data is generated first

    std::string lexicon_path; // empty = bundled demo lexicon
    som::SomConfig som;
    std::optional<int> k; // SOM-Ward cluster count; empty = auto
    double alpha = 0.05;
    double noteworthy_tau = 0.30;

    enum class BehaviorMap { overlay, separate };
    BehaviorMap behavior_map = BehaviorMap::overlay;
    bool ward_record_weighted = false;

    std::string out_dir;
    bool force = false;
    std::uint64_t seed = 0;
};

struct RunResult {
    std::string out_dir;
    std::string manifest_path;
    std::vector<std::string> map_files; // relative to out_dir
    std::size_t unscorable_items = 0;
    int k = 0;
};

// Full pipeline: ingest -> lexicon scoring -> feature build + normalize ->
// SOM train -> SOM-Ward -> 13 map renderings -> KS + tau matrix -> report.md
// with a deterministic manifest of content hashes.
RunResult run_report(const RunConfig& config);

// Behavior profiles aligned to dataset.work_items; items without scorable
// text get an all-zero profile and are counted.
struct ScoredProfiles {
    std::vector<lexicon::BehaviorProfile> profiles;
    std::size_t unscorable = 0;
};
ScoredProfiles score_dataset(const model::Dataset& dataset, const lexicon::Lexicon& lex);

std::string profiles_csv(const ScoredProfiles& scored, const lexicon::Lexicon& lex);

// Parses a profiles.csv back into per-category columns keyed by item id.
struct ProfileTable {
    std::vector<std::string> ids;
    std::vector<std::string> categories;
    std::vector<std::vector<double>> percentages; // row-major
};
ProfileTable read_profiles_csv(const std::string& path);

// Refuses to reuse a non-empty directory unless force is set.
void prepare_out_dir(const std::string& path, bool force);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::string& path);

} // namespace taskmap::report
