#include "taskmap/cluster.hpp"

#include "taskmap/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

using nlohmann::json;

namespace taskmap::cluster {

namespace {

struct Agglomeration {
    std::vector<MergeStep> trace;              // merges in order
    std::vector<std::pair<int, int>> pairs;    // merged group ids per step
};

// Full agglomeration to one cluster, recording every merge. Group ids are
// node indices initially; a merge keeps the lower-numbered group id.
Agglomeration agglomerate(const som::SomMap& map, const std::vector<double>& weights) {
    const int n = map.node_count();
    const std::size_t d = static_cast<std::size_t>(map.dim());

    std::vector<bool> active(static_cast<std::size_t>(n), true);
    std::vector<double> size(weights);
    std::vector<std::vector<double>> mean(map.prototypes);
    std::vector<int> min_node(static_cast<std::size_t>(n));
    std::iota(min_node.begin(), min_node.end(), 0);

    // cluster adjacency, seeded by lattice adjacency
    std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n),
                                       std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (som::lattice_adjacent(map, a, b)) {
                adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
                adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
            }

    Agglomeration out;
    for (int merge = 0; merge < n - 1; ++merge) {
        double best_cost = std::numeric_limits<double>::infinity();
        int best_a = -1, best_b = -1;
        std::pair<int, int> best_key{std::numeric_limits<int>::max(),
                                     std::numeric_limits<int>::max()};
        for (int a = 0; a < n; ++a) {
            if (!active[static_cast<std::size_t>(a)]) continue;
            for (int b = a + 1; b < n; ++b) {
                if (!active[static_cast<std::size_t>(b)]) continue;
                if (!adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
                double dist2 = 0.0;
                for (std::size_t q = 0; q < d; ++q) {
                    const double dlt = mean[static_cast<std::size_t>(a)][q] -
                                       mean[static_cast<std::size_t>(b)][q];
                    dist2 += dlt * dlt;
                }
                const double sa = size[static_cast<std::size_t>(a)];
                const double sb = size[static_cast<std::size_t>(b)];
                const double cost = sa * sb / (sa + sb) * dist2;
                std::pair<int, int> key{
                    std::min(min_node[static_cast<std::size_t>(a)],
                             min_node[static_cast<std::size_t>(b)]),
                    std::max(min_node[static_cast<std::size_t>(a)],
                             min_node[static_cast<std::size_t>(b)])};
                if (cost < best_cost || (cost == best_cost && key < best_key)) {
                    best_cost = cost;
                    best_a = a;
                    best_b = b;
                    best_key = key;
                }
            }
        }
        if (best_a < 0) fail("InternalError", "lattice not connected during agglomeration");

        const auto ua = static_cast<std::size_t>(best_a);
        const auto ub = static_cast<std::size_t>(best_b);
        MergeStep step;
        step.cost = best_cost;
        step.repr_a = std::min(min_node[ua], min_node[ub]);
        step.repr_b = std::max(min_node[ua], min_node[ub]);
        step.clusters_after = n - merge - 1;
        out.trace.push_back(step);
        out.pairs.emplace_back(best_a, best_b);

        const double sa = size[ua], sb = size[ub];
        for (std::size_t q = 0; q < d; ++q)
            mean[ua][q] = (sa * mean[ua][q] + sb * mean[ub][q]) / (sa + sb);
        size[ua] = sa + sb;
        min_node[ua] = std::min(min_node[ua], min_node[ub]);
        active[ub] = false;
        for (int c = 0; c < n; ++c)
            if (adj[ub][static_cast<std::size_t>(c)]) {
                adj[ua][static_cast<std::size_t>(c)] = true;
                adj[static_cast<std::size_t>(c)][ua] = true;
            }
        adj[ua][ua] = false;
    }
    return out;
}

std::vector<int> labels_at_k(const Agglomeration& agg, int n, int k) {
    // Union-find replay of the first n-k merges.
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (int m = 0; m < n - k; ++m) {
        const auto [a, b] = agg.pairs[static_cast<std::size_t>(m)];
        parent[static_cast<std::size_t>(find(b))] = find(a);
    }
    // labels in first-seen node order, 1-based
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    int next = 0;
    std::vector<int> root_label(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        const int r = find(v);
        if (root_label[static_cast<std::size_t>(r)] == 0) root_label[static_cast<std::size_t>(r)] = ++next;
        labels[static_cast<std::size_t>(v)] = root_label[static_cast<std::size_t>(r)];
    }
    return labels;
}

} // namespace

ClusterAssignment som_ward_cluster(const som::SomMap& map, std::optional<int> k,
                                   const std::vector<double>* node_weights) {
    if (!map.trained) fail("UntrainedMap", "som_ward_cluster needs a trained map");
    const int n = map.node_count();
    if (k && (*k < 1 || *k > n))
        fail("KOutOfRange", "k must be in [1, " + std::to_string(n) + "], got " + std::to_string(*k));
    std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
    if (node_weights) {
        if (static_cast<int>(node_weights->size()) != n)
            fail("LengthMismatch", "node_weights length must equal node count");
        for (std::size_t i = 0; i < weights.size(); ++i)
            weights[i] = std::max(1e-12, (*node_weights)[i]);
    }

    ClusterAssignment out;
    if (n == 1) {
        out.k = 1;
        out.node_to_cluster = {1};
        return out;
    }

    const Agglomeration agg = agglomerate(map, weights);
    out.merge_trace = agg.trace;

    int kk;
    if (k) {
        kk = *k;
    } else {
        // Largest relative jump in merge cost: cost(k -> k-1) / cost(k+1 -> k).
        // The merge reducing m clusters to m-1 is trace entry n-m.
        const int hi = std::min(15, static_cast<int>(std::ceil(n / 4.0)));
        if (hi < 2) {
            kk = std::min(2, n);
        } else {
            kk = 2;
            double best_ratio = -1.0;
            for (int cand = 2; cand <= hi; ++cand) {
                const double num = agg.trace[static_cast<std::size_t>(n - cand)].cost;
                const double den = agg.trace[static_cast<std::size_t>(n - cand - 1)].cost;
                double ratio;
                if (den > 0.0) ratio = num / den;
                else ratio = num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    kk = cand;
                }
            }
        }
    }

    out.k = kk;
    out.node_to_cluster = labels_at_k(agg, n, kk);
    return out;
}

std::vector<int> assign_records(const som::SomMap& map, const ClusterAssignment& clusters,
                                const model::FeatureMatrix& data) {
    if (static_cast<int>(clusters.node_to_cluster.size()) != map.node_count())
        fail("DimensionMismatch", "cluster assignment does not match the map");
    if (static_cast<int>(data.n_cols()) != map.dim())
        fail("DimensionMismatch", "assign_records: data dimension vs map dimension");
    std::vector<int> labels;
    labels.reserve(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        labels.push_back(
            clusters.node_to_cluster[static_cast<std::size_t>(som::find_bmu(map, data.values[i]))]);
    return labels;
}

std::vector<ClusterProfile> cluster_profiles(
    const std::vector<int>& labels, const model::FeatureMatrix& features,
    const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
    if (labels.size() != features.n_rows())
        fail("LengthMismatch", "cluster_profiles: labels length vs feature rows");
    for (const auto& [name, col] : extra)
        if (col.size() != labels.size())
            fail("LengthMismatch", "cluster_profiles: extra column '" + name + "' length");

    int k = 0;
    for (int l : labels) k = std::max(k, l);
    const std::size_t d = features.n_cols();

    std::vector<ClusterProfile> profiles;
    for (int label = 1; label <= k; ++label) {
        ClusterProfile p;
        p.label = label;
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) members.push_back(i);
        p.size = members.size();
        p.feature_mean.assign(d, 0.0);
        p.feature_median.assign(d, 0.0);
        if (!members.empty()) {
            for (std::size_t j = 0; j < d; ++j) {
                std::vector<double> vals;
                vals.reserve(members.size());
                for (std::size_t i : members) vals.push_back(features.values[i][j]);
                p.feature_mean[j] =
                    std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
                std::sort(vals.begin(), vals.end());
                const std::size_t m = vals.size();
                p.feature_median[j] = m % 2 ? vals[m / 2] : 0.5 * (vals[m / 2 - 1] + vals[m / 2]);
            }
            for (const auto& [name, col] : extra) {
                double s = 0.0;
                for (std::size_t i : members) s += col[i];
                p.extra_mean.push_back(s / static_cast<double>(members.size()));
            }
        } else {
            p.extra_mean.assign(extra.size(), 0.0);
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

std::string to_json(const ClusterAssignment& a) {
    json j;
    j["k"] = a.k;
    j["node_to_cluster"] = a.node_to_cluster;
    json trace = json::array();
    for (const auto& s : a.merge_trace)
        trace.push_back({{"cost", s.cost},
                         {"repr_a", s.repr_a},
                         {"repr_b", s.repr_b},
                         {"clusters_after", s.clusters_after}});
    j["merge_trace"] = std::move(trace);
    return j.dump(2) + "\n";
}

ClusterAssignment cluster_assignment_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail("SchemaError", "cluster assignment: invalid JSON");
    ClusterAssignment a;
    try {
        a.k = j.at("k").get<int>();
        a.node_to_cluster = j.at("node_to_cluster").get<std::vector<int>>();
        for (const auto& rec : j.at("merge_trace")) {
            MergeStep s;
            s.cost = rec.at("cost").get<double>();
            s.repr_a = rec.at("repr_a").get<int>();
            s.repr_b = rec.at("repr_b").get<int>();
            s.clusters_after = rec.at("clusters_after").get<int>();
            a.merge_trace.push_back(s);
        }
    } catch (const json::exception& e) {
        fail("SchemaError", std::string("cluster assignment: ") + e.what());
    }
    return a;
}

void save_cluster_assignment(const ClusterAssignment& a, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("MissingFile", "cannot write " + path);
    out << to_json(a);
}

ClusterAssignment load_cluster_assignment(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("MissingFile", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return cluster_assignment_from_json(buf.str());
}

} // namespace taskmap::cluster
