#include "taskmap/gen.hpp"

#include "taskmap/errors.hpp"
#include "taskmap/rng.hpp"
#include "taskmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace taskmap::gen {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Words injected for each category; every entry matches the corresponding
// demo-lexicon category.
const std::vector<std::vector<std::string>> kCategoryWords = {
    {"give", "buddy", "love", "together", "thanks", "team", "meeting", "discussed", "sharing",
     "friends"},
    {"great", "good", "nice", "happy", "excellent", "awesome", "perfect", "glad", "improved",
     "winning"},
    {"bad", "hate", "annoying", "failed", "wrong", "broken", "worried", "frustrating", "nasty",
     "terrible"},
    {"think", "consider", "determine", "because", "reasoning", "understand", "analyze", "logical",
     "ideas", "wondering"},
    {"working", "tasks", "project", "deadline", "review", "planning", "manager", "reported",
     "schedule", "code"},
    {"achieved", "completed", "finished", "done", "success", "accomplished", "goals", "delivered",
     "solved", "resolved"}};

// Filler vocabulary that matches no demo-lexicon pattern (checked by test).
const std::vector<std::string> kBackgroundWords = {
    "the",  "of",    "to",    "and",  "a",     "in",   "it",    "is",   "that",  "was",
    "for",  "on",    "are",   "with", "as",    "at",   "be",    "this", "have",  "from",
    "or",   "had",   "by",    "but",  "not",   "they", "which", "one",  "you",   "were",
    "her",  "all",   "she",   "when", "who",   "will", "more",  "if",   "no",    "out",
    "so",   "said",  "what",  "up",   "its",   "about", "than", "into", "them",  "can",
    "only", "new",   "some",  "could", "time", "these", "two",  "may",  "then",  "do",
    "first", "any",  "my",    "now",  "such",  "like", "our",   "over", "me",    "even",
    "most", "made",  "after", "also", "did",   "many", "before", "must", "through", "where"};

double pattern_sign(int bit) { return bit ? 1.0 : -1.0; }

int poisson_quantile(double u, double lambda) {
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 100000) {
        ++k;
        p *= lambda / k;
        cdf += p;
    }
    return k;
}

double coupling_for(const GenConfig& cfg, const std::string& a, const std::string& b) {
    for (const auto& c : cfg.couplings) {
        if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) return c.strength;
    }
    return 0.0;
}

void validate(const GenConfig& cfg) {
    if (cfg.n_items < 1) fail("InvalidConfig", "n_items must be >= 1");
    if (cfg.n_iterations < 1) fail("InvalidConfig", "n_iterations must be >= 1");
    if (cfg.median_time_days <= 0.0) fail("InvalidConfig", "median_time_days must be > 0");
    if (cfg.n_latent_clusters < 1) fail("InvalidConfig", "n_latent_clusters must be >= 1");
    if (cfg.words_per_message < 1) fail("InvalidConfig", "words_per_message must be >= 1");
    if (cfg.priority_min >= cfg.priority_max)
        fail("InvalidConfig", "priority range must be non-empty");
    for (const auto& c : cfg.couplings) {
        if (c.strength < -1.0 || c.strength > 1.0)
            fail("InvalidConfig", "coupling strength must be in [-1,1]");
        const bool known =
            ((c.a == "comment_count" && c.b == "developer_count") ||
             (c.a == "developer_count" && c.b == "comment_count") ||
             (c.a == "negemo" && c.b == "developer_count") ||
             (c.a == "developer_count" && c.b == "negemo"));
        if (!known)
            fail("InvalidConfig", "unsupported coupling pair (" + c.a + ", " + c.b + ")");
    }
}

} // namespace

std::vector<Coupling> default_couplings() {
    return {{"comment_count", "developer_count", 0.7}, {"negemo", "developer_count", 0.3}};
}

Generated generate(const GenConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);

    const double tau_comment = coupling_for(cfg, "comment_count", "developer_count");
    const double tau_negemo = coupling_for(cfg, "negemo", "developer_count");
    // Gaussian-copula latent correlation hitting a tau target for the
    // continuous latents; discretization shrinks the measured tau a little.
    const double rho_comment = std::sin(kPi * tau_comment / 2.0);
    const double rho_negemo = std::sin(kPi * tau_negemo / 2.0);

    const double prio_mid = 0.5 * (cfg.priority_min + cfg.priority_max);
    const double prio_span = 0.5 * (cfg.priority_max - cfg.priority_min);
    const double log_median = std::log(cfg.median_time_days);

    Generated out;
    out.dataset.n_iterations = cfg.n_iterations;
    out.dataset.work_items.reserve(static_cast<std::size_t>(cfg.n_items));
    out.truth.item_ids.reserve(static_cast<std::size_t>(cfg.n_items));

    const int author_pool = std::max(10, std::min(474, cfg.n_items / 20 + 10));
    long long message_seq = 0;

    for (int i = 0; i < cfg.n_items; ++i) {
        model::WorkItem item;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "wi%06d", i + 1);
        item.id = idbuf;

        const double kind_u = rng.uniform();
        item.kind = kind_u < 0.45   ? model::WorkItemKind::defect
                    : kind_u < 0.80 ? model::WorkItemKind::support
                                    : model::WorkItemKind::enhancement;

        const int cluster = rng.uniform_int(0, cfg.n_latent_clusters - 1);
        // Cluster centers sit at half the vertices of a cube in
        // (iteration, log time, priority): signs (a, b, a*b). This keeps
        // the three attribute pairs rank-uncorrelated at the center level.
        const int pattern = cluster % 4;
        const double scale = 1.0 + 0.35 * (cluster / 4);
        const double sa = pattern_sign(pattern & 1);
        const double sb = pattern_sign((pattern >> 1) & 1);
        const double sc = sa * sb;

        const double iter_frac =
            std::clamp(0.5 + 0.28 * sa * scale + 0.05 * rng.normal(), 0.0, 1.0);
        item.iteration =
            std::clamp(1 + static_cast<int>(std::lround(iter_frac * (cfg.n_iterations - 1))), 1,
                       cfg.n_iterations);

        item.time_taken_days = std::exp(log_median + 0.68 * sb * scale + 0.18 * rng.normal());

        item.priority = std::clamp(prio_mid + 0.70 * prio_span * sc * scale + 0.13 * rng.normal(),
                                   cfg.priority_min, cfg.priority_max);

        // Developer factor: the cluster parity (a*b) flows through g, so the
        // comment/developer/role family carries the third cluster contrast.
        // Any two of the three contrasts (a, b, a*b) distinguish all four
        // patterns, which keeps the clusters recoverable from a 2D map.
        const double g = 0.68 * sc * scale + std::sqrt(1.0 - 0.68 * 0.68) * rng.normal();
        item.developer_count = 1 + poisson_quantile(stats::normal_cdf(g), 2.0);

        const double eps_c = rng.normal();
        const double h =
            rho_comment * g + std::sqrt(std::max(0.0, 1.0 - rho_comment * rho_comment)) * eps_c;
        item.comment_count = poisson_quantile(stats::normal_cdf(h), 3.5);

        int roles = 1;
        for (int dvr = 1; dvr < item.developer_count; ++dvr)
            if (rng.uniform() < 0.4) ++roles;
        item.role_count = std::min(roles, item.developer_count + 1);

        // Injected category rates; negemo rides the developer latent.
        const double eps_n = rng.normal();
        const double hn =
            rho_negemo * g + std::sqrt(std::max(0.0, 1.0 - rho_negemo * rho_negemo)) * eps_n;
        std::array<double, 6> rates{};
        rates[0] = 0.02 + 0.06 * rng.uniform();               // social
        rates[1] = 0.01 + 0.04 * rng.uniform();               // posemo
        rates[2] = 0.005 + 0.035 * stats::normal_cdf(hn);     // negemo
        rates[3] = 0.02 + 0.06 * rng.uniform();               // cogmech
        rates[4] = 0.02 + 0.06 * rng.uniform();               // work
        rates[5] = 0.01 + 0.03 * rng.uniform();               // achieve

        for (int msg = 0; msg < item.comment_count; ++msg) {
            ++message_seq;
            model::Message m;
            char mbuf[32];
            std::snprintf(mbuf, sizeof(mbuf), "m%08lld", message_seq);
            m.id = mbuf;
            m.work_item_id = item.id;
            char abuf[32];
            std::snprintf(abuf, sizeof(abuf), "p%03d", rng.uniform_int(1, author_pool));
            m.author_id = abuf;

            const int len = std::max(3, cfg.words_per_message + rng.uniform_int(-5, 5));
            std::string text;
            for (int w = 0; w < len; ++w) {
                if (w) text.push_back(' ');
                const double u = rng.uniform();
                double cum = 0.0;
                int chosen = -1;
                for (int cat = 0; cat < 6; ++cat) {
                    cum += rates[static_cast<std::size_t>(cat)];
                    if (u < cum) {
                        chosen = cat;
                        break;
                    }
                }
                if (chosen >= 0) {
                    const auto& words = kCategoryWords[static_cast<std::size_t>(chosen)];
                    text += words[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<int>(words.size()) - 1))];
                } else {
                    text += kBackgroundWords[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<int>(kBackgroundWords.size()) - 1))];
                }
            }
            m.text = std::move(text);
            out.dataset.messages.push_back(std::move(m));
        }

        out.truth.item_ids.push_back(item.id);
        out.truth.latent_cluster.push_back(cluster + 1);
        out.truth.category_rates.push_back(rates);
        out.dataset.work_items.push_back(std::move(item));
    }

    return out;
}

std::string ground_truth_csv(const GroundTruth& t) {
    std::string out = "id,latent_cluster,rate_social,rate_posemo,rate_negemo,rate_cogmech,"
                      "rate_work,rate_achieve\n";
    char buf[64];
    for (std::size_t i = 0; i < t.item_ids.size(); ++i) {
        out += t.item_ids[i];
        out += ',';
        out += std::to_string(t.latent_cluster[i]);
        for (double r : t.category_rates[i]) {
            std::snprintf(buf, sizeof(buf), ",%.6f", r);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_files(const Generated& g, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) fail("MissingFile", "cannot write " + (fs::path(dir) / name).string());
        f << content;
    };
    write("work_items.csv", model::work_items_csv(g.dataset.work_items));
    write("messages.csv", model::messages_csv(g.dataset.messages));
    write("ground_truth.csv", ground_truth_csv(g.truth));
}

} // namespace taskmap::gen
