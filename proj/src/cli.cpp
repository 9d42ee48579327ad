#include "taskmap/cli.hpp"

#include "taskmap/cluster.hpp"
#include "taskmap/csv.hpp"
#include "taskmap/errors.hpp"
#include "taskmap/gen.hpp"
#include "taskmap/lexicon.hpp"
#include "taskmap/model.hpp"
#include "taskmap/report.hpp"
#include "taskmap/som.hpp"
#include "taskmap/stats.hpp"
#include "taskmap/viz.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace taskmap::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int exit_code_for(const DataError& e) {
    const auto& k = e.kind();
    if (k == "InvalidConfig" || k == "KOutOfRange" || k == "OutputDirNotEmpty") return kExitUsage;
    return kExitData;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("MissingFile", "cannot write " + path.string());
    out << content;
}

struct SomOptions {
    int rows = 0, cols = 0;
    std::string lattice = "hexagonal";
    int epochs = 50;
    double sigma0 = 0.0;
    double sigma_final = 0.5;
    std::string init = "random";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--rows", rows, "map rows (0 = auto)");
        cmd->add_option("--cols", cols, "map cols (0 = auto)");
        cmd->add_option("--lattice", lattice, "hexagonal|rectangular")
            ->check(CLI::IsMember({"hexagonal", "rectangular"}));
        cmd->add_option("--epochs", epochs, "training epochs")->check(CLI::PositiveNumber);
        cmd->add_option("--sigma0", sigma0, "initial neighborhood width (0 = max(rows,cols)/2)");
        cmd->add_option("--sigma-final", sigma_final, "final neighborhood width")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--init", init, "pca_plane|random")
            ->check(CLI::IsMember({"pca_plane", "random"}));
    }

    som::SomConfig to_config(std::uint64_t seed) const {
        som::SomConfig cfg;
        cfg.rows = rows;
        cfg.cols = cols;
        cfg.lattice = *som::parse_lattice(lattice);
        cfg.epochs = epochs;
        cfg.sigma0 = sigma0;
        cfg.sigma_final = sigma_final;
        cfg.init = *som::parse_init(init);
        cfg.seed = seed;
        return cfg;
    }
};

struct GenOptions {
    int items = 10215;
    int iterations = 30;
    int latent_clusters = 4;
    double median_days = 35.0;
    int words_per_message = 40;
    double coupling_comment_dev = 0.7;
    double coupling_negemo_dev = 0.3;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--items", items, "number of work items")->check(CLI::PositiveNumber);
        cmd->add_option("--iterations", iterations, "number of iterations")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--latent-clusters", latent_clusters, "planted latent clusters")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--median-days", median_days, "median task duration in days")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--words-per-message", words_per_message, "words per message")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--coupling-comment-dev", coupling_comment_dev,
                        "target tau for (comment_count, developer_count)")
            ->check(CLI::Range(-1.0, 1.0));
        cmd->add_option("--coupling-negemo-dev", coupling_negemo_dev,
                        "target tau for (negemo, developer_count)")
            ->check(CLI::Range(-1.0, 1.0));
    }

    gen::GenConfig to_config(std::uint64_t seed) const {
        gen::GenConfig cfg;
        cfg.n_items = items;
        cfg.n_iterations = iterations;
        cfg.n_latent_clusters = latent_clusters;
        cfg.median_time_days = median_days;
        cfg.words_per_message = words_per_message;
        cfg.couplings = {{"comment_count", "developer_count", coupling_comment_dev},
                         {"negemo", "developer_count", coupling_negemo_dev}};
        cfg.seed = seed;
        return cfg;
    }
};

model::FeatureMatrix normalized_view(const model::FeatureMatrix& m) {
    return m.normalized() ? m : model::zscore_normalize(m);
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"work-item analytics: lexicon scoring, SOM clustering, maps and statistics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file");

    std::uint64_t seed = 0;
    std::string out;
    bool force = false;

    // generate ---------------------------------------------------------------
    auto* cmd_generate = app.add_subcommand("generate", "write a synthetic dataset");
    GenOptions gen_opts;
    gen_opts.add_to(cmd_generate);
    cmd_generate->add_option("--seed", seed, "random seed");
    cmd_generate->add_option("-o,--out", out, "output directory")->required();
    cmd_generate->add_flag("--force", force, "allow a non-empty output directory");
    cmd_generate->callback([&] {
        report::prepare_out_dir(out, force);
        const gen::Generated g = gen::generate(gen_opts.to_config(seed));
        gen::write_files(g, out);
        std::cout << "wrote " << g.dataset.work_items.size() << " work items, "
                  << g.dataset.messages.size() << " messages to " << out << "\n";
    });

    // ingest -----------------------------------------------------------------
    auto* cmd_ingest = app.add_subcommand("ingest", "validate input files, write canonical dataset");
    std::string wi_path, msg_path;
    cmd_ingest->add_option("--work-items", wi_path, "work-item file (.csv or .json)")->required();
    cmd_ingest->add_option("--messages", msg_path, "message file (.csv or .json)");
    cmd_ingest->add_option("-o,--out", out, "output directory")->required();
    cmd_ingest->add_flag("--force", force, "allow a non-empty output directory");
    cmd_ingest->callback([&] {
        report::prepare_out_dir(out, force);
        const model::IngestResult r =
            msg_path.empty() ? model::ingest_dataset(wi_path)
                             : model::ingest_dataset(wi_path, msg_path);
        write_file(fs::path(out) / "work_items.csv", model::work_items_csv(r.dataset.work_items));
        if (!msg_path.empty())
            write_file(fs::path(out) / "messages.csv", model::messages_csv(r.dataset.messages));
        std::string diag;
        for (const auto& d : r.diagnostics) diag += model::format(d) + "\n";
        write_file(fs::path(out) / "ingest_diagnostics.txt", diag);
        for (const auto& d : r.diagnostics) std::cerr << model::format(d) << "\n";
        std::cout << "accepted " << r.dataset.work_items.size() << "/" << r.work_item_rows
                  << " work items, " << r.dataset.messages.size() << "/" << r.message_rows
                  << " messages; " << r.error_count() << " errors, " << r.warning_count()
                  << " warnings\n";
    });

    // score --------------------------------------------------------------------
    auto* cmd_score = app.add_subcommand("score", "lexicon-score message text per work item");
    std::string lexicon_path;
    cmd_score->add_option("--work-items", wi_path, "work-item file")->required();
    cmd_score->add_option("--messages", msg_path, "message file")->required();
    cmd_score->add_option("--lexicon", lexicon_path, "lexicon file (default: bundled demo)");
    cmd_score->add_option("-o,--out", out, "output directory")->required();
    cmd_score->add_flag("--force", force, "allow a non-empty output directory");
    cmd_score->callback([&] {
        report::prepare_out_dir(out, force);
        const model::IngestResult r = model::ingest_dataset(wi_path, msg_path);
        const lexicon::Lexicon lex = lexicon_path.empty()
                                         ? lexicon::demo_lexicon()
                                         : lexicon::compile_lexicon_file(lexicon_path);
        const report::ScoredProfiles scored = report::score_dataset(r.dataset, lex);
        write_file(fs::path(out) / "profiles.csv", report::profiles_csv(scored, lex));
        std::cout << "scored " << scored.profiles.size() << " work items ("
                  << scored.unscorable << " without scorable text)\n";
    });

    // train ----------------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "train a SOM on a feature matrix");
    std::string features_path;
    SomOptions som_opts;
    cmd_train->add_option("--features", features_path, "feature matrix (features.json)")->required();
    som_opts.add_to(cmd_train);
    cmd_train->add_option("--seed", seed, "random seed");
    cmd_train->add_option("-o,--out", out, "output directory")->required();
    cmd_train->add_flag("--force", force, "allow a non-empty output directory");
    cmd_train->callback([&] {
        report::prepare_out_dir(out, force);
        const model::FeatureMatrix raw = model::load_feature_matrix(features_path);
        const model::FeatureMatrix norm = normalized_view(raw);
        const som::SomMap map = som::train_batch(som::init_map(som_opts.to_config(seed), norm), norm);
        som::save_som_map(map, (fs::path(out) / "som_map.json").string());
        std::cout << "trained " << map.config.rows << "x" << map.config.cols << " map; QE="
                  << som::quantization_error(map, norm) << " TE="
                  << som::topographic_error(map, norm) << "\n";
    });

    // cluster -----------------------------------------------------------------------
    auto* cmd_cluster = app.add_subcommand("cluster", "SOM-Ward clustering of a trained map");
    std::string map_path;
    std::optional<int> k;
    bool ward_weighted = false;
    cmd_cluster->add_option("--map", map_path, "trained map (som_map.json)")->required();
    cmd_cluster->add_option("--k", k, "cluster count (default: auto by cost jump)");
    cmd_cluster->add_option("--features", features_path,
                            "feature matrix; required with --ward-weighted");
    cmd_cluster->add_flag("--ward-weighted", ward_weighted,
                          "weight node prototypes by mapped record counts");
    cmd_cluster->add_option("-o,--out", out, "output directory")->required();
    cmd_cluster->add_flag("--force", force, "allow a non-empty output directory");
    cmd_cluster->callback([&] {
        report::prepare_out_dir(out, force);
        const som::SomMap map = som::load_som_map(map_path);
        std::optional<std::vector<double>> weights;
        if (ward_weighted) {
            if (features_path.empty())
                fail("InvalidConfig", "--ward-weighted needs --features");
            const model::FeatureMatrix norm =
                normalized_view(model::load_feature_matrix(features_path));
            std::vector<double> w(static_cast<std::size_t>(map.node_count()), 0.0);
            for (std::size_t i = 0; i < norm.n_rows(); ++i)
                w[static_cast<std::size_t>(som::find_bmu(map, norm.values[i]))] += 1.0;
            weights = std::move(w);
        }
        const cluster::ClusterAssignment a =
            cluster::som_ward_cluster(map, k, weights ? &*weights : nullptr);
        cluster::save_cluster_assignment(a, (fs::path(out) / "clusters.json").string());
        std::cout << "k=" << a.k << "\n";
    });

    // render -----------------------------------------------------------------------
    auto* cmd_render = app.add_subcommand("render", "render cluster and component maps");
    std::string clusters_path, profiles_path;
    cmd_render->add_option("--map", map_path, "trained map (som_map.json)")->required();
    cmd_render->add_option("--features", features_path, "raw feature matrix (features.json)")
        ->required();
    cmd_render->add_option("--clusters", clusters_path, "cluster assignment (clusters.json)");
    cmd_render->add_option("--profiles", profiles_path, "behavior profiles (profiles.csv)");
    cmd_render->add_option("-o,--out", out, "output directory")->required();
    cmd_render->add_flag("--force", force, "allow a non-empty output directory");
    cmd_render->callback([&] {
        report::prepare_out_dir(out, force);
        const som::SomMap map = som::load_som_map(map_path);
        const model::FeatureMatrix raw = model::load_feature_matrix(features_path);
        const model::FeatureMatrix norm = normalized_view(raw);
        std::optional<cluster::ClusterAssignment> clusters;
        if (!clusters_path.empty()) clusters = cluster::load_cluster_assignment(clusters_path);
        int n_files = 0;
        if (clusters) {
            write_file(fs::path(out) / "cluster_map.svg",
                       viz::render_cluster_map(map, *clusters, "Cluster map"));
            ++n_files;
        }
        for (std::size_t j = 0; j < raw.n_cols(); ++j) {
            const auto node_values = som::project_attribute(map, norm, raw.column(j));
            write_file(fs::path(out) / ("attr_" + raw.column_names[j] + ".svg"),
                       viz::render_component_map(map, node_values,
                                                 clusters ? &*clusters : nullptr,
                                                 raw.column_names[j]));
            ++n_files;
        }
        if (!profiles_path.empty()) {
            const report::ProfileTable table = report::read_profiles_csv(profiles_path);
            if (table.ids != raw.row_ids)
                fail("SchemaError", "profiles.csv rows do not match the feature matrix rows");
            for (std::size_t c = 0; c < table.categories.size(); ++c) {
                std::vector<double> col;
                col.reserve(table.ids.size());
                for (const auto& row : table.percentages) col.push_back(row[c]);
                const auto node_values = som::project_attribute(map, norm, col);
                write_file(fs::path(out) / ("beh_" + table.categories[c] + ".svg"),
                           viz::render_component_map(map, node_values,
                                                     clusters ? &*clusters : nullptr,
                                                     table.categories[c] + " (%)"));
                ++n_files;
            }
        }
        std::cout << "wrote " << n_files << " maps to " << out << "\n";
    });

    // stats ---------------------------------------------------------------------------
    auto* cmd_stats = app.add_subcommand("stats", "KS normality and tau-b correlation matrix");
    double alpha = 0.05, noteworthy = 0.30;
    int mc_replicates = 0;
    cmd_stats->add_option("--features", features_path, "raw feature matrix (features.json)")
        ->required();
    cmd_stats->add_option("--profiles", profiles_path, "behavior profiles (profiles.csv)");
    cmd_stats->add_option("--alpha", alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    cmd_stats->add_option("--noteworthy-tau", noteworthy, "emphasis threshold on |tau|")
        ->check(CLI::Range(0.0, 1.0));
    cmd_stats->add_option("--lilliefors-mc", mc_replicates,
                          "also compute a Monte Carlo Lilliefors p with this many replicates");
    cmd_stats->add_option("--seed", seed, "seed for the Monte Carlo p");
    cmd_stats->add_option("-o,--out", out, "output directory")->required();
    cmd_stats->add_flag("--force", force, "allow a non-empty output directory");
    cmd_stats->callback([&] {
        report::prepare_out_dir(out, force);
        const model::FeatureMatrix raw = model::load_feature_matrix(features_path);
        json ks = json::array();
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
                if (mc_replicates > 0)
                    rec["mc_p_value"] = stats::lilliefors_mc_pvalue(col, mc_replicates, seed);
            } catch (const DataError& e) {
                rec["error"] = e.kind();
            }
            ks.push_back(std::move(rec));
        }
        write_file(fs::path(out) / "ks.json", ks.dump(2) + "\n");

        std::vector<std::pair<std::string, std::vector<double>>> columns;
        for (std::size_t j = 0; j < raw.n_cols(); ++j)
            columns.emplace_back(raw.column_names[j], raw.column(j));
        if (!profiles_path.empty()) {
            const report::ProfileTable table = report::read_profiles_csv(profiles_path);
            if (table.ids != raw.row_ids)
                fail("SchemaError", "profiles.csv rows do not match the feature matrix rows");
            for (std::size_t c = 0; c < table.categories.size(); ++c) {
                std::vector<double> col;
                for (const auto& row : table.percentages) col.push_back(row[c]);
                columns.emplace_back(table.categories[c], std::move(col));
            }
        }
        const stats::CorrelationMatrix m = stats::correlation_matrix(columns, alpha, noteworthy);
        write_file(fs::path(out) / "correlations.json", stats::to_json(m));
        write_file(fs::path(out) / "correlation_table.md", stats::render_markdown(m));
        std::cout << "wrote ks.json, correlations.json, correlation_table.md to " << out << "\n";
    });

    // report --------------------------------------------------------------------------
    auto* cmd_report = app.add_subcommand("report", "run the full pipeline and assemble a report");
    bool use_gen = false;
    GenOptions report_gen_opts;
    SomOptions report_som_opts;
    std::string behavior_map = "overlay";
    cmd_report->add_option("--work-items", wi_path, "work-item file");
    cmd_report->add_option("--messages", msg_path, "message file");
    cmd_report->add_flag("--gen", use_gen, "generate a synthetic dataset first");
    report_gen_opts.add_to(cmd_report);
    report_som_opts.add_to(cmd_report);
    cmd_report->add_option("--lexicon", lexicon_path, "lexicon file (default: bundled demo)");
    cmd_report->add_option("--k", k, "SOM-Ward cluster count (default: auto)");
    cmd_report->add_option("--alpha", alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    cmd_report->add_option("--noteworthy-tau", noteworthy, "emphasis threshold on |tau|")
        ->check(CLI::Range(0.0, 1.0));
    cmd_report->add_option("--behavior-map", behavior_map, "overlay|separate")
        ->check(CLI::IsMember({"overlay", "separate"}));
    cmd_report->add_flag("--ward-weighted", ward_weighted,
                         "weight node prototypes by mapped record counts");
    cmd_report->add_option("--seed", seed, "random seed for every stochastic stage");
    cmd_report->add_option("-o,--out", out, "output directory")->required();
    cmd_report->add_flag("--force", force, "allow a non-empty output directory");
    cmd_report->callback([&] {
        report::RunConfig cfg;
        if (use_gen) {
            cfg.generate = report_gen_opts.to_config(seed);
        } else {
            if (wi_path.empty()) fail("InvalidConfig", "report needs --work-items or --gen");
            cfg.work_item_path = wi_path;
            if (!msg_path.empty()) cfg.message_path = msg_path;
        }
        cfg.lexicon_path = lexicon_path;
        cfg.som = report_som_opts.to_config(seed);
        cfg.k = k;
        cfg.alpha = alpha;
        cfg.noteworthy_tau = noteworthy;
        cfg.behavior_map = behavior_map == "separate" ? report::RunConfig::BehaviorMap::separate
                                                      : report::RunConfig::BehaviorMap::overlay;
        cfg.ward_record_weighted = ward_weighted;
        cfg.out_dir = out;
        cfg.force = force;
        cfg.seed = seed;
        const report::RunResult r = report::run_report(cfg);
        std::cout << "report written to " << r.out_dir << " (" << r.map_files.size()
                  << " maps, k=" << r.k << ")\n";
    });

    std::vector<const char*> argv;
    argv.push_back("taskmap");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

} // namespace taskmap::cli
