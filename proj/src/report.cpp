#include "taskmap/report.hpp"

#include "taskmap/csv.hpp"
#include "taskmap/errors.hpp"
#include "taskmap/stats.hpp"
#include "taskmap/viz.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace fs = std::filesystem;
using nlohmann::json;

namespace taskmap::report {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("MissingFile", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("MissingFile", "cannot write " + path.string());
    out << content;
}

std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) { return fnv1a64(read_file(path)); }

void prepare_out_dir(const std::string& path, bool force) {
    fs::path p(path);
    if (fs::exists(p)) {
        if (!fs::is_directory(p)) fail("OutputDirNotEmpty", path + " exists and is not a directory");
        if (!fs::is_empty(p) && !force)
            fail("OutputDirNotEmpty", path + " is not empty; pass --force to reuse it");
    }
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) fail("MissingFile", "cannot create directory " + path);
}

ScoredProfiles score_dataset(const model::Dataset& dataset, const lexicon::Lexicon& lex) {
    std::unordered_map<std::string, std::vector<const model::Message*>> by_item;
    for (const auto& msg : dataset.messages) by_item[msg.work_item_id].push_back(&msg);

    ScoredProfiles out;
    out.profiles.reserve(dataset.work_items.size());
    for (const auto& item : dataset.work_items) {
        const auto it = by_item.find(item.id);
        bool scored = false;
        if (it != by_item.end()) {
            try {
                out.profiles.push_back(lexicon::score_work_item(item.id, it->second, lex));
                scored = true;
            } catch (const DataError& e) {
                if (e.kind() != "NoScorableText") throw;
            }
        }
        if (!scored) {
            // Items without scorable text keep an all-zero profile so the
            // attribute and behavior matrices stay row-aligned.
            lexicon::BehaviorProfile zero;
            zero.work_item_id = item.id;
            zero.word_count = 0;
            zero.percentages.assign(lex.categories.size(), 0.0);
            out.profiles.push_back(std::move(zero));
            ++out.unscorable;
        }
    }
    return out;
}

std::string profiles_csv(const ScoredProfiles& scored, const lexicon::Lexicon& lex) {
    std::string out = "id,word_count";
    for (const auto& cat : lex.categories) out += "," + cat;
    out += "\n";
    char buf[64];
    for (const auto& p : scored.profiles) {
        out += csv::quote(p.work_item_id);
        out += ',';
        out += std::to_string(p.word_count);
        for (double pct : p.percentages) {
            // 17 significant digits round-trip exactly, so stats recomputed
            // from this file match the in-memory pipeline bit for bit
            std::snprintf(buf, sizeof(buf), ",%.17g", pct);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ProfileTable read_profiles_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != "word_count")
        fail("SchemaError", path + ": expected header id,word_count,<categories...>");
    ProfileTable out;
    out.categories.assign(t.header.begin() + 2, t.header.end());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size())
            fail("SchemaError", path + ": row " + std::to_string(r + 1) + " has wrong field count");
        out.ids.push_back(row[0]);
        std::vector<double> pcts;
        for (std::size_t c = 2; c < row.size(); ++c) pcts.push_back(std::stod(row[c]));
        out.percentages.push_back(std::move(pcts));
    }
    return out;
}

namespace {

struct StageOutputs {
    std::vector<std::string> map_files;
    std::string correlation_md;
    json ks_json = json::array();
    std::string ks_md;
    std::string cluster_profile_md;
};

std::string ks_section(const model::FeatureMatrix& raw, double alpha, json& ks_out) {
    std::ostringstream md;
    md << "| attribute | n | D | p | normality rejected (alpha=" << alpha << ") |\n";
    md << "|---|---|---|---|---|\n";
    for (std::size_t j = 0; j < raw.n_cols(); ++j) {
        const auto col = raw.column(j);
        json rec;
        rec["attribute"] = raw.column_names[j];
        rec["n"] = col.size();
        try {
            const stats::KsResult r = stats::ks_test_normal_fitted(col);
            rec["d_statistic"] = r.d_statistic;
            rec["p_value"] = r.p_value;
            rec["reference"] = r.reference;
            rec["fitted_params"] = r.fitted_params;
            md << "| " << raw.column_names[j] << " | " << col.size() << " | "
               << fmt4(r.d_statistic) << " | " << fmt4(r.p_value) << " | "
               << (r.p_value < alpha ? "yes" : "no") << " |\n";
        } catch (const DataError& e) {
            rec["error"] = e.kind();
            md << "| " << raw.column_names[j] << " | " << col.size() << " | - | - | not testable ("
               << e.kind() << ") |\n";
        }
        ks_out.push_back(std::move(rec));
    }
    md << "\nNote: parameters of the reference normal are estimated from the data, which makes\n"
          "these p-values anti-conservative (the Lilliefors caveat).\n";
    return md.str();
}

std::string cluster_profile_table(const std::vector<cluster::ClusterProfile>& profiles,
                                  const model::FeatureMatrix& raw,
                                  const std::vector<std::string>& extra_names) {
    std::ostringstream md;
    md << "| cluster | size |";
    for (const auto& name : raw.column_names) md << " " << name << " (mean/median) |";
    for (const auto& name : extra_names) md << " " << name << " (mean) |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < raw.n_cols() + extra_names.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& p : profiles) {
        md << "| C" << p.label << " | " << p.size << " |";
        for (std::size_t j = 0; j < raw.n_cols(); ++j)
            md << " " << fmt2(p.feature_mean[j]) << " / " << fmt2(p.feature_median[j]) << " |";
        for (double v : p.extra_mean) md << " " << fmt2(v) << " |";
        md << "\n";
    }
    return md.str();
}

json config_json(const RunConfig& cfg) {
    json j;
    if (cfg.work_item_path) j["work_items"] = *cfg.work_item_path;
    if (cfg.message_path) j["messages"] = *cfg.message_path;
    if (cfg.generate) {
        const auto& g = *cfg.generate;
        json cj = json::array();
        for (const auto& c : g.couplings) cj.push_back({{"a", c.a}, {"b", c.b}, {"strength", c.strength}});
        j["generate"] = {{"n_items", g.n_items},
                         {"n_iterations", g.n_iterations},
                         {"median_time_days", g.median_time_days},
                         {"n_latent_clusters", g.n_latent_clusters},
                         {"words_per_message", g.words_per_message},
                         {"couplings", std::move(cj)},
                         {"seed", g.seed}};
    }
    j["lexicon"] = cfg.lexicon_path.empty() ? "(bundled demo)" : cfg.lexicon_path;
    j["som"] = {{"rows", cfg.som.rows},
                {"cols", cfg.som.cols},
                {"lattice", som::to_string(cfg.som.lattice)},
                {"epochs", cfg.som.epochs},
                {"sigma0", cfg.som.sigma0},
                {"sigma_final", cfg.som.sigma_final},
                {"init", som::to_string(cfg.som.init)},
                {"seed", cfg.som.seed}};
    if (cfg.k) j["k"] = *cfg.k;
    else j["k"] = "auto";
    j["alpha"] = cfg.alpha;
    j["noteworthy_tau"] = cfg.noteworthy_tau;
    j["behavior_map"] = cfg.behavior_map == RunConfig::BehaviorMap::overlay ? "overlay" : "separate";
    j["ward_record_weighted"] = cfg.ward_record_weighted;
    j["seed"] = cfg.seed;
    return j;
}

void write_manifest(const fs::path& out_dir, const RunConfig& cfg, const std::string& status,
                    const json& extra) {
    json manifest;
    manifest["status"] = status;
    manifest["seed"] = cfg.seed;
    manifest["config"] = config_json(cfg);
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();

    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), out_dir).generic_string();
        if (rel == "manifest.json") continue;
        paths.push_back(rel);
    }
    std::sort(paths.begin(), paths.end());
    json files = json::array();
    for (const auto& rel : paths) {
        const std::string bytes = read_file((out_dir / rel).string());
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        files.push_back({{"path", rel}, {"bytes", bytes.size()}, {"fnv1a64", hash}});
    }
    manifest["files"] = std::move(files);
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace

RunResult run_report(const RunConfig& config) {
    if (config.out_dir.empty()) fail("InvalidConfig", "report needs an output directory");
    prepare_out_dir(config.out_dir, config.force);
    const fs::path out_dir(config.out_dir);

    RunResult result;
    result.out_dir = config.out_dir;
    result.manifest_path = (out_dir / "manifest.json").string();

    try {
        // --- data ---------------------------------------------------------
        std::string wi_path, msg_path;
        if (config.generate) {
            gen::GenConfig gcfg = *config.generate;
            gcfg.seed = config.seed;
            const gen::Generated g = gen::generate(gcfg);
            gen::write_files(g, (out_dir / "dataset").string());
            wi_path = (out_dir / "dataset" / "work_items.csv").string();
            msg_path = (out_dir / "dataset" / "messages.csv").string();
        } else {
            if (!config.work_item_path) fail("InvalidConfig", "need --work-items or --gen");
            wi_path = *config.work_item_path;
            msg_path = config.message_path.value_or("");
        }

        const model::IngestResult ingest =
            msg_path.empty() ? model::ingest_dataset(wi_path)
                             : model::ingest_dataset(wi_path, msg_path);
        if (!ingest.diagnostics.empty()) {
            std::string diag;
            for (const auto& d : ingest.diagnostics) diag += model::format(d) + "\n";
            write_file(out_dir / "ingest_diagnostics.txt", diag);
        }
        const model::Dataset& dataset = ingest.dataset;
        if (dataset.work_items.empty()) fail("EmptyDataset", "no valid work items after ingest");

        // --- behaviors ------------------------------------------------------
        const lexicon::Lexicon lex = config.lexicon_path.empty()
                                         ? lexicon::demo_lexicon()
                                         : lexicon::compile_lexicon_file(config.lexicon_path);
        const ScoredProfiles scored = score_dataset(dataset, lex);
        result.unscorable_items = scored.unscorable;
        write_file(out_dir / "profiles.csv", profiles_csv(scored, lex));

        // --- features -------------------------------------------------------
        const model::FeatureMatrix raw = model::build_feature_matrix(dataset);
        model::save_feature_matrix(raw, (out_dir / "features.json").string());
        const model::FeatureMatrix normalized = model::zscore_normalize(raw);

        // --- SOM ------------------------------------------------------------
        som::SomConfig scfg = config.som;
        scfg.seed = config.seed;
        std::vector<std::string> warnings;
        const som::SomMap initial = som::init_map(scfg, normalized, &warnings);
        const som::SomMap map = som::train_batch(initial, normalized);
        som::save_som_map(map, (out_dir / "som_map.json").string());

        // --- clusters ---------------------------------------------------------
        std::optional<std::vector<double>> weights;
        if (config.ward_record_weighted) {
            std::vector<double> w(static_cast<std::size_t>(map.node_count()), 0.0);
            for (std::size_t i = 0; i < normalized.n_rows(); ++i)
                w[static_cast<std::size_t>(som::find_bmu(map, normalized.values[i]))] += 1.0;
            weights = std::move(w);
        }
        const cluster::ClusterAssignment clusters =
            cluster::som_ward_cluster(map, config.k, weights ? &*weights : nullptr);
        result.k = clusters.k;
        cluster::save_cluster_assignment(clusters, (out_dir / "clusters.json").string());
        const std::vector<int> record_labels = cluster::assign_records(map, clusters, normalized);

        // --- renderings -------------------------------------------------------
        StageOutputs stage;
        const auto emit_map = [&](const std::string& name, const std::string& svg) {
            write_file(out_dir / "maps" / name, svg);
            stage.map_files.push_back("maps/" + name);
        };
        emit_map("cluster_map.svg", viz::render_cluster_map(map, clusters, "Cluster map"));
        for (std::size_t j = 0; j < raw.n_cols(); ++j) {
            const auto values = raw.column(j);
            const auto node_values = som::project_attribute(map, normalized, values);
            emit_map("attr_" + raw.column_names[j] + ".svg",
                     viz::render_component_map(map, node_values, &clusters, raw.column_names[j]));
        }

        std::vector<std::pair<std::string, std::vector<double>>> behavior_columns;
        for (std::size_t c = 0; c < lex.categories.size(); ++c) {
            std::vector<double> col;
            col.reserve(scored.profiles.size());
            for (const auto& p : scored.profiles) col.push_back(p.percentages[c]);
            behavior_columns.emplace_back(lex.categories[c], std::move(col));
        }

        if (config.behavior_map == RunConfig::BehaviorMap::overlay) {
            for (const auto& [cat, col] : behavior_columns) {
                const auto node_values = som::project_attribute(map, normalized, col);
                emit_map("beh_" + cat + ".svg",
                         viz::render_component_map(map, node_values, &clusters, cat + " (%)"));
            }
        } else {
            // Second map trained on the behavior percentages themselves.
            model::FeatureMatrix beh;
            beh.row_ids = raw.row_ids;
            for (const auto& [cat, col] : behavior_columns) beh.column_names.push_back(cat);
            beh.values.assign(raw.n_rows(), std::vector<double>(behavior_columns.size(), 0.0));
            for (std::size_t i = 0; i < raw.n_rows(); ++i)
                for (std::size_t c = 0; c < behavior_columns.size(); ++c)
                    beh.values[i][c] = behavior_columns[c].second[i];
            const model::FeatureMatrix beh_norm = model::zscore_normalize(beh);
            som::SomConfig bcfg = config.som;
            bcfg.seed = config.seed;
            const som::SomMap beh_map = som::train_batch(som::init_map(bcfg, beh_norm), beh_norm);
            som::save_som_map(beh_map, (out_dir / "som_map_behavior.json").string());
            const cluster::ClusterAssignment beh_clusters =
                cluster::som_ward_cluster(beh_map, config.k);
            cluster::save_cluster_assignment(beh_clusters,
                                             (out_dir / "clusters_behavior.json").string());
            for (const auto& [cat, col] : behavior_columns) {
                const auto node_values = som::project_attribute(beh_map, beh_norm, col);
                emit_map("beh_" + cat + ".svg",
                         viz::render_component_map(beh_map, node_values, &beh_clusters, cat + " (%)"));
            }
        }
        result.map_files = stage.map_files;

        // --- statistics --------------------------------------------------------
        json ks_json = json::array();
        stage.ks_md = ks_section(raw, config.alpha, ks_json);
        write_file(out_dir / "stats" / "ks.json", ks_json.dump(2) + "\n");

        std::vector<std::pair<std::string, std::vector<double>>> columns;
        for (std::size_t j = 0; j < raw.n_cols(); ++j)
            columns.emplace_back(raw.column_names[j], raw.column(j));
        for (const auto& bc : behavior_columns) columns.push_back(bc);
        const stats::CorrelationMatrix matrix =
            stats::correlation_matrix(columns, config.alpha, config.noteworthy_tau);
        stage.correlation_md = stats::render_markdown(matrix);
        write_file(out_dir / "stats" / "correlations.json", stats::to_json(matrix));
        write_file(out_dir / "stats" / "correlation_table.md", stage.correlation_md);

        std::vector<std::string> extra_names;
        for (const auto& [cat, col] : behavior_columns) extra_names.push_back(cat);
        const auto profiles = cluster::cluster_profiles(record_labels, raw, behavior_columns);
        stage.cluster_profile_md = cluster_profile_table(profiles, raw, extra_names);
        {
            std::string csv_text = "cluster,size";
            for (const auto& name : raw.column_names) csv_text += "," + name + "_mean," + name + "_median";
            for (const auto& name : extra_names) csv_text += "," + name + "_mean";
            csv_text += "\n";
            char buf[64];
            for (const auto& p : profiles) {
                csv_text += "C" + std::to_string(p.label) + "," + std::to_string(p.size);
                for (std::size_t j = 0; j < raw.n_cols(); ++j) {
                    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", p.feature_mean[j],
                                  p.feature_median[j]);
                    csv_text += buf;
                }
                for (double v : p.extra_mean) {
                    std::snprintf(buf, sizeof(buf), ",%.6f", v);
                    csv_text += buf;
                }
                csv_text += "\n";
            }
            write_file(out_dir / "cluster_profiles.csv", csv_text);
        }

        // --- report ---------------------------------------------------------
        std::ostringstream md;
        md << "# Work-item analysis report\n\n";
        md << "Seed: " << config.seed << "\n\n";
        md << "## Dataset\n\n";
        md << "- work items: " << dataset.work_items.size() << "\n";
        md << "- messages: " << dataset.messages.size() << "\n";
        md << "- ingest diagnostics: " << ingest.error_count() << " errors, "
           << ingest.warning_count() << " warnings\n";
        md << "- items without scorable text (all-zero behavior profile): "
           << scored.unscorable << "\n\n";
        for (const auto& w : warnings) md << "- warning: " << w << "\n";
        md << "## Maps\n\n";
        md << "SOM: " << map.config.rows << "x" << map.config.cols << " "
           << som::to_string(map.config.lattice) << " lattice, " << map.config.epochs
           << " epochs; SOM-Ward clusters: " << clusters.k << "\n\n";
        md << "![cluster map](maps/cluster_map.svg)\n\n";
        md << "### Task attributes\n\n";
        for (std::size_t j = 0; j < raw.n_cols(); ++j)
            md << "![" << raw.column_names[j] << "](maps/attr_" << raw.column_names[j]
               << ".svg)\n";
        md << "\n### Behaviors\n\n";
        for (const auto& [cat, col] : behavior_columns)
            md << "![" << cat << "](maps/beh_" << cat << ".svg)\n";
        md << "\n## Normality (Kolmogorov-Smirnov)\n\n" << stage.ks_md;
        md << "\n## Kendall tau-b correlations\n\n" << stage.correlation_md;
        md << "\n## Cluster profiles\n\n" << stage.cluster_profile_md;
        md << "\nMachine-readable results: features.json, som_map.json, clusters.json,\n"
              "profiles.csv, cluster_profiles.csv, stats/ks.json, stats/correlations.json.\n";
        write_file(out_dir / "report.md", md.str());

        json extra;
        extra["unscorable_items"] = scored.unscorable;
        extra["k"] = clusters.k;
        extra["ingest_errors"] = ingest.error_count();
        extra["ingest_warnings"] = ingest.warning_count();
        write_manifest(out_dir, config, "complete", extra);
    } catch (const std::exception& e) {
        // Partial outputs stay on disk; the manifest marks the run incomplete.
        json extra;
        extra["error"] = e.what();
        write_manifest(out_dir, config, "incomplete", extra);
        throw;
    }
    return result;
}

} // namespace taskmap::report
