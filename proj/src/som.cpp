#include "taskmap/som.hpp"

#include "taskmap/errors.hpp"
#include "taskmap/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using nlohmann::json;

namespace taskmap::som {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

struct Eigen2 {
    double l1 = 0.0, l2 = 0.0;          // largest two eigenvalues
    std::vector<double> v1, v2;         // corresponding unit eigenvectors
};

// Cyclic Jacobi on a small symmetric matrix; plenty for d <= a few dozen.
Eigen2 top_two_eigen(std::vector<std::vector<double>> a) {
    const std::size_t d = a.size();
    std::vector<std::vector<double>> v(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });

    Eigen2 out;
    out.l1 = a[idx[0]][idx[0]];
    out.v1.resize(d);
    for (std::size_t k = 0; k < d; ++k) out.v1[k] = v[k][idx[0]];
    if (d > 1) {
        out.l2 = a[idx[1]][idx[1]];
        out.v2.resize(d);
        for (std::size_t k = 0; k < d; ++k) out.v2[k] = v[k][idx[1]];
    } else {
        out.l2 = 0.0;
        out.v2.assign(d, 0.0);
    }

    // Deterministic sign: largest-magnitude component positive.
    for (auto* vec : {&out.v1, &out.v2}) {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < d; ++k)
            if (std::abs((*vec)[k]) > std::abs((*vec)[arg])) arg = k;
        if ((*vec)[arg] < 0.0)
            for (auto& x : *vec) x = -x;
    }
    return out;
}

std::vector<double> column_means(const model::FeatureMatrix& data) {
    const std::size_t n = data.n_rows(), d = data.n_cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data.values[i][j];
    for (auto& m : mean) m /= static_cast<double>(n);
    return mean;
}

std::vector<std::vector<double>> covariance(const model::FeatureMatrix& data,
                                            const std::vector<double>& mean) {
    const std::size_t n = data.n_rows(), d = data.n_cols();
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < d; ++p) {
            const double dp = data.values[i][p] - mean[p];
            for (std::size_t q = p; q < d; ++q)
                cov[p][q] += dp * (data.values[i][q] - mean[q]);
        }
    const double div = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            cov[p][q] /= div;
            cov[q][p] = cov[p][q];
        }
    return cov;
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double dlt = a[k] - b[k];
        s += dlt * dlt;
    }
    return s;
}

} // namespace

std::string to_string(Lattice l) {
    return l == Lattice::hexagonal ? "hexagonal" : "rectangular";
}

std::string to_string(InitMethod m) {
    return m == InitMethod::pca_plane ? "pca_plane" : "random";
}

std::optional<Lattice> parse_lattice(std::string_view s) {
    if (s == "hexagonal" || s == "hex") return Lattice::hexagonal;
    if (s == "rectangular" || s == "rect") return Lattice::rectangular;
    return std::nullopt;
}

std::optional<InitMethod> parse_init(std::string_view s) {
    if (s == "pca_plane" || s == "pca") return InitMethod::pca_plane;
    if (s == "random") return InitMethod::random_uniform;
    return std::nullopt;
}

Point lattice_position(Lattice lattice, int row, int col) {
    if (lattice == Lattice::hexagonal)
        return {static_cast<double>(col) + 0.5 * static_cast<double>(row % 2),
                static_cast<double>(row) * (kSqrt3 / 2.0)};
    return {static_cast<double>(col), static_cast<double>(row)};
}

double lattice_distance(const SomMap& map, int node_a, int node_b) {
    if (node_a < 0 || node_a >= map.node_count() || node_b < 0 || node_b >= map.node_count())
        fail("IndexOutOfRange", "lattice_distance: node index out of range");
    const Point& pa = map.positions[static_cast<std::size_t>(node_a)];
    const Point& pb = map.positions[static_cast<std::size_t>(node_b)];
    const double dx = pa.x - pb.x, dy = pa.y - pb.y;
    return std::sqrt(dx * dx + dy * dy);
}

bool lattice_adjacent(const SomMap& map, int node_a, int node_b) {
    return node_a != node_b && lattice_distance(map, node_a, node_b) <= 1.01;
}

std::pair<int, int> auto_map_size(const model::FeatureMatrix& data) {
    const std::size_t n = data.n_rows();
    if (n == 0) fail("EmptyData", "auto_map_size needs data");
    const double munits = 5.0 * std::sqrt(static_cast<double>(n));
    double ratio = 1.0; // rows/cols tracks the top-two eigenvalue ratio
    if (data.n_cols() >= 2 && n >= 2) {
        const auto mean = column_means(data);
        const Eigen2 eig = top_two_eigen(covariance(data, mean));
        if (eig.l2 > 1e-12 && eig.l1 > eig.l2) ratio = eig.l1 / eig.l2;
    }
    ratio = std::min(ratio, munits); // keep both sides >= 1
    int rows = std::max(1, static_cast<int>(std::lround(std::sqrt(munits * ratio))));
    int cols = std::max(1, static_cast<int>(std::lround(munits / rows)));
    return {rows, cols};
}

SomMap init_map(SomConfig config, const model::FeatureMatrix& data,
                std::vector<std::string>* warnings) {
    const std::size_t n = data.n_rows();
    const std::size_t d = data.n_cols();
    if (n == 0 || d == 0) fail("EmptyData", "init_map needs a non-empty matrix");

    if (config.rows <= 0 || config.cols <= 0) {
        const auto [r, c] = auto_map_size(data);
        config.rows = r;
        config.cols = c;
    }
    if (config.sigma0 <= 0.0)
        config.sigma0 = std::max(config.rows, config.cols) / 2.0;
    if (config.sigma_final <= 0.0 || config.sigma_final > config.sigma0)
        fail("InvalidConfig", "need sigma0 >= sigma_final > 0");
    if (config.epochs < 1) fail("InvalidConfig", "epochs must be >= 1");

    SomMap map;
    map.config = config;
    map.feature_names = data.column_names;
    const int nodes = config.rows * config.cols;
    map.positions.reserve(static_cast<std::size_t>(nodes));
    for (int r = 0; r < config.rows; ++r)
        for (int c = 0; c < config.cols; ++c)
            map.positions.push_back(lattice_position(config.lattice, r, c));
    map.prototypes.assign(static_cast<std::size_t>(nodes), std::vector<double>(d, 0.0));

    if (config.init == InitMethod::pca_plane) {
        if (static_cast<std::size_t>(nodes) > n)
            fail("InvalidConfig", "pca_plane init needs rows*cols <= number of records");
        const auto mean = column_means(data);
        const Eigen2 eig = top_two_eigen(covariance(data, mean));
        if (d >= 2 && eig.l2 > 1e-12) {
            // first component along the row axis (the long side under auto
            // sizing), second along the columns
            const double s1 = std::sqrt(std::max(0.0, eig.l1));
            const double s2 = std::sqrt(std::max(0.0, eig.l2));
            for (int r = 0; r < config.rows; ++r) {
                const double v = config.rows > 1
                                     ? 2.0 * static_cast<double>(r) / (config.rows - 1) - 1.0
                                     : 0.0;
                for (int c = 0; c < config.cols; ++c) {
                    const double u = config.cols > 1
                                         ? 2.0 * static_cast<double>(c) / (config.cols - 1) - 1.0
                                         : 0.0;
                    auto& proto = map.prototypes[static_cast<std::size_t>(map.node_index(r, c))];
                    for (std::size_t k = 0; k < d; ++k)
                        proto[k] = mean[k] + v * s1 * eig.v1[k] + u * s2 * eig.v2[k];
                }
            }
            return map;
        }
        if (nodes == 1 || d == 1) {
            // Degenerate lattice or dimension: every prototype at the mean,
            // spread along the first component when it exists.
            const double s1 = std::sqrt(std::max(0.0, eig.l1));
            for (int r = 0; r < config.rows; ++r)
                for (int c = 0; c < config.cols; ++c) {
                    const double u = config.cols > 1
                                         ? 2.0 * static_cast<double>(c) / (config.cols - 1) - 1.0
                                         : 0.0;
                    auto& proto = map.prototypes[static_cast<std::size_t>(map.node_index(r, c))];
                    for (std::size_t k = 0; k < d; ++k)
                        proto[k] = mean[k] + u * s1 * (d == 1 ? 1.0 : eig.v1[k]);
                }
            return map;
        }
        if (warnings)
            warnings->push_back("DegenerateCovariance: second principal component is "
                                "numerically zero; falling back to random init");
    }

    // random init: per-feature uniform over the empirical min-max
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            lo[k] = std::min(lo[k], data.values[i][k]);
            hi[k] = std::max(hi[k], data.values[i][k]);
        }
    Rng rng(config.seed);
    for (auto& proto : map.prototypes)
        for (std::size_t k = 0; k < d; ++k) proto[k] = rng.uniform(lo[k], hi[k]);
    return map;
}

int find_bmu(const SomMap& map, std::span<const double> v) {
    if (static_cast<int>(v.size()) != map.dim())
        fail("DimensionMismatch", "find_bmu: vector dimension " + std::to_string(v.size()) +
                                      " vs map dimension " + std::to_string(map.dim()));
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < map.node_count(); ++i) {
        const double d2 = sq_distance(map.prototypes[static_cast<std::size_t>(i)], v);
        if (d2 < best_d) {
            best_d = d2;
            best = i;
        }
    }
    return best;
}

SomMap train_batch(const SomMap& map, const model::FeatureMatrix& data, TrainTrace* trace) {
    const std::size_t n = data.n_rows();
    if (n == 0) fail("EmptyData", "train_batch needs at least one record");
    if (static_cast<int>(data.n_cols()) != map.dim())
        fail("DimensionMismatch", "train_batch: data dimension " + std::to_string(data.n_cols()) +
                                      " vs map dimension " + std::to_string(map.dim()));

    SomMap out = map;
    const int nodes = out.node_count();
    const std::size_t d = data.n_cols();
    const int epochs = out.config.epochs;
    const double sigma0 = out.config.sigma0;
    const double sigma_final = out.config.sigma_final;

    // Pairwise lattice distances, fixed by geometry.
    std::vector<double> dist2(static_cast<std::size_t>(nodes) * nodes);
    for (int a = 0; a < nodes; ++a)
        for (int b = 0; b < nodes; ++b) {
            const double dd = lattice_distance(out, a, b);
            dist2[static_cast<std::size_t>(a) * nodes + b] = dd * dd;
        }

    std::vector<double> node_sum(static_cast<std::size_t>(nodes) * d);
    std::vector<double> node_cnt(static_cast<std::size_t>(nodes));
    std::vector<std::vector<double>> next(static_cast<std::size_t>(nodes),
                                          std::vector<double>(d, 0.0));

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double frac = epochs > 1 ? static_cast<double>(epoch) / (epochs - 1) : 0.0;
        const double sigma = sigma0 * std::pow(sigma_final / sigma0, frac);
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

        std::fill(node_sum.begin(), node_sum.end(), 0.0);
        std::fill(node_cnt.begin(), node_cnt.end(), 0.0);

        // Records in stored order; per-node accumulation keeps the
        // reduction order fixed, so results are bit-reproducible.
        for (std::size_t i = 0; i < n; ++i) {
            const int bmu = find_bmu(out, data.values[i]);
            double* sum = &node_sum[static_cast<std::size_t>(bmu) * d];
            for (std::size_t k = 0; k < d; ++k) sum[k] += data.values[i][k];
            node_cnt[static_cast<std::size_t>(bmu)] += 1.0;
        }

        for (int i = 0; i < nodes; ++i) {
            double weight_total = 0.0;
            auto& acc = next[static_cast<std::size_t>(i)];
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int c = 0; c < nodes; ++c) {
                if (node_cnt[static_cast<std::size_t>(c)] == 0.0) continue;
                const double h =
                    std::exp(-dist2[static_cast<std::size_t>(c) * nodes + i] * inv2s2);
                if (h == 0.0) continue;
                const double* sum = &node_sum[static_cast<std::size_t>(c) * d];
                for (std::size_t k = 0; k < d; ++k) acc[k] += h * sum[k];
                weight_total += h * node_cnt[static_cast<std::size_t>(c)];
            }
            if (weight_total > 0.0) {
                auto& proto = out.prototypes[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < d; ++k) proto[k] = acc[k] / weight_total;
            }
            // zero denominator: prototype keeps its previous value
        }

        if (trace) {
            trace->sigma_per_epoch.push_back(sigma);
            trace->qe_per_epoch.push_back(quantization_error(out, data));
        }
    }

    out.trained = true;
    return out;
}

double quantization_error(const SomMap& map, const model::FeatureMatrix& data) {
    const std::size_t n = data.n_rows();
    if (n == 0) fail("EmptyData", "quantization_error needs data");
    if (static_cast<int>(data.n_cols()) != map.dim())
        fail("DimensionMismatch", "quantization_error: dimensions disagree");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int bmu = find_bmu(map, data.values[i]);
        total += std::sqrt(sq_distance(map.prototypes[static_cast<std::size_t>(bmu)],
                                       data.values[i]));
    }
    return total / static_cast<double>(n);
}

double topographic_error(const SomMap& map, const model::FeatureMatrix& data) {
    if (map.node_count() < 2) fail("SingleNodeMap", "topographic_error needs >= 2 nodes");
    const std::size_t n = data.n_rows();
    if (n == 0) fail("EmptyData", "topographic_error needs data");
    if (static_cast<int>(data.n_cols()) != map.dim())
        fail("DimensionMismatch", "topographic_error: dimensions disagree");
    std::size_t bad = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int best = -1, second = -1;
        double best_d = std::numeric_limits<double>::infinity();
        double second_d = std::numeric_limits<double>::infinity();
        for (int node = 0; node < map.node_count(); ++node) {
            const double d2 = sq_distance(map.prototypes[static_cast<std::size_t>(node)],
                                          data.values[i]);
            if (d2 < best_d) {
                second_d = best_d;
                second = best;
                best_d = d2;
                best = node;
            } else if (d2 < second_d) {
                second_d = d2;
                second = node;
            }
        }
        if (!lattice_adjacent(map, best, second)) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(n);
}

std::vector<double> project_attribute(const SomMap& map, const model::FeatureMatrix& data,
                                      std::span<const double> values) {
    if (values.size() != data.n_rows())
        fail("LengthMismatch", "project_attribute: " + std::to_string(values.size()) +
                                   " values for " + std::to_string(data.n_rows()) + " records");
    const int nodes = map.node_count();
    std::vector<double> sum(static_cast<std::size_t>(nodes), 0.0);
    std::vector<double> cnt(static_cast<std::size_t>(nodes), 0.0);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const int bmu = find_bmu(map, data.values[i]);
        sum[static_cast<std::size_t>(bmu)] += values[i];
        cnt[static_cast<std::size_t>(bmu)] += 1.0;
    }
    std::vector<double> out(static_cast<std::size_t>(nodes), 0.0);
    std::vector<bool> filled(static_cast<std::size_t>(nodes), false);
    for (int i = 0; i < nodes; ++i)
        if (cnt[static_cast<std::size_t>(i)] > 0.0) {
            out[static_cast<std::size_t>(i)] =
                sum[static_cast<std::size_t>(i)] / cnt[static_cast<std::size_t>(i)];
            filled[static_cast<std::size_t>(i)] = true;
        }

    if (std::none_of(filled.begin(), filled.end(), [](bool f) { return f; }))
        return out; // no records at all: zeros

    // Jacobi-style fill rounds: each empty node takes the mean of the
    // neighbors filled in previous rounds. The lattice is connected, so
    // this terminates.
    while (std::any_of(filled.begin(), filled.end(), [](bool f) { return !f; })) {
        std::vector<double> round_val(static_cast<std::size_t>(nodes), 0.0);
        std::vector<bool> round_new(static_cast<std::size_t>(nodes), false);
        for (int i = 0; i < nodes; ++i) {
            if (filled[static_cast<std::size_t>(i)]) continue;
            double s = 0.0;
            int m = 0;
            for (int j = 0; j < nodes; ++j) {
                if (!filled[static_cast<std::size_t>(j)]) continue;
                if (lattice_adjacent(map, i, j)) {
                    s += out[static_cast<std::size_t>(j)];
                    ++m;
                }
            }
            if (m > 0) {
                round_val[static_cast<std::size_t>(i)] = s / m;
                round_new[static_cast<std::size_t>(i)] = true;
            }
        }
        for (int i = 0; i < nodes; ++i)
            if (round_new[static_cast<std::size_t>(i)]) {
                out[static_cast<std::size_t>(i)] = round_val[static_cast<std::size_t>(i)];
                filled[static_cast<std::size_t>(i)] = true;
            }
    }
    return out;
}

std::string to_json(const SomMap& map) {
    json j;
    j["config"] = {{"rows", map.config.rows},
                   {"cols", map.config.cols},
                   {"lattice", to_string(map.config.lattice)},
                   {"epochs", map.config.epochs},
                   {"sigma0", map.config.sigma0},
                   {"sigma_final", map.config.sigma_final},
                   {"init", to_string(map.config.init)},
                   {"seed", map.config.seed}};
    j["feature_names"] = map.feature_names;
    j["trained"] = map.trained;
    json protos = json::array();
    for (const auto& p : map.prototypes)
        for (double v : p) protos.push_back(v); // row-major flat array
    j["prototypes"] = std::move(protos);
    return j.dump(2) + "\n";
}

SomMap som_map_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail("SchemaError", "som map: invalid JSON");
    SomMap map;
    try {
        const auto& c = j.at("config");
        map.config.rows = c.at("rows").get<int>();
        map.config.cols = c.at("cols").get<int>();
        if (map.config.rows < 1 || map.config.cols < 1)
            fail("SchemaError", "som map: rows and cols must be >= 1");
        auto lattice = parse_lattice(c.at("lattice").get<std::string>());
        auto init = parse_init(c.at("init").get<std::string>());
        if (!lattice || !init) fail("SchemaError", "som map: unknown lattice or init");
        map.config.lattice = *lattice;
        map.config.init = *init;
        map.config.epochs = c.at("epochs").get<int>();
        map.config.sigma0 = c.at("sigma0").get<double>();
        map.config.sigma_final = c.at("sigma_final").get<double>();
        map.config.seed = c.at("seed").get<std::uint64_t>();
        map.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        map.trained = j.at("trained").get<bool>();
        const auto flat = j.at("prototypes").get<std::vector<double>>();
        const std::size_t nodes =
            static_cast<std::size_t>(map.config.rows) * static_cast<std::size_t>(map.config.cols);
        if (nodes == 0 || flat.size() % nodes != 0)
            fail("SchemaError", "som map: prototype array size does not match the lattice");
        const std::size_t d = flat.size() / nodes;
        if (d != map.feature_names.size())
            fail("SchemaError", "som map: dimension does not match feature names");
        map.prototypes.assign(nodes, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t k = 0; k < d; ++k) map.prototypes[i][k] = flat[i * d + k];
    } catch (const json::exception& e) {
        fail("SchemaError", std::string("som map: ") + e.what());
    }
    map.positions.clear();
    for (int r = 0; r < map.config.rows; ++r)
        for (int c = 0; c < map.config.cols; ++c)
            map.positions.push_back(lattice_position(map.config.lattice, r, c));
    return map;
}

void save_som_map(const SomMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("MissingFile", "cannot write " + path);
    out << to_json(map);
}

SomMap load_som_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("MissingFile", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return som_map_from_json(buf.str());
}

} // namespace taskmap::som
