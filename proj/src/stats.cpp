#include "taskmap/stats.hpp"

#include "taskmap/errors.hpp"
#include "taskmap/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

using nlohmann::json;

namespace taskmap::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Merge sort that counts inversions (strict decreases) in y.
long long count_inversions(std::vector<double>& y, std::vector<double>& tmp,
                           std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    long long inv = count_inversions(y, tmp, lo, mid) + count_inversions(y, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (y[j] < y[i]) {
            inv += static_cast<long long>(mid - i);
            tmp[k++] = y[j++];
        } else {
            tmp[k++] = y[i++];
        }
    }
    while (i < mid) tmp[k++] = y[i++];
    while (j < hi) tmp[k++] = y[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              y.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

TieSummary tie_summary_from_groups(const std::vector<long long>& groups) {
    TieSummary s;
    for (long long t : groups) {
        const auto td = static_cast<double>(t);
        s.pair_count += t * (t - 1) / 2;
        s.sum_t1 += td * (td - 1.0);
        s.sum_t2 += td * (td - 1.0) * (td - 2.0);
        s.sum_v += td * (td - 1.0) * (2.0 * td + 5.0);
    }
    return s;
}

std::vector<long long> tie_groups(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<long long> groups;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        if (j - i > 1) groups.push_back(static_cast<long long>(j - i));
        i = j;
    }
    return groups;
}

} // namespace

CorrelationResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        fail("LengthMismatch", "kendall_tau_b: x has " + std::to_string(x.size()) + " values, y has " +
                                   std::to_string(y.size()));
    const std::size_t n = x.size();
    if (n < 2) fail("TooShort", "kendall_tau_b needs n >= 2, got " + std::to_string(n));

    CorrelationResult r;
    r.n = n;
    r.ties_x = tie_summary_from_groups(tie_groups({x.begin(), x.end()}));
    r.ties_y = tie_summary_from_groups(tie_groups({y.begin(), y.end()}));

    const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
    const long long n1 = r.ties_x.pair_count;
    const long long n2 = r.ties_y.pair_count;
    if (n1 == n0 || n2 == n0) { // constant variable
        r.degenerate = true;
        r.tau_b = 0.0;
        r.z = 0.0;
        r.p_two_sided = 1.0;
        return r;
    }

    // Knight's algorithm: sort by (x, y); inversions of y are exactly the
    // discordant pairs, pairs tied in both variables counted separately.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    long long n3 = 0; // pairs tied in both x and y
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
            const long long t = static_cast<long long>(j - i);
            n3 += t * (t - 1) / 2;
            i = j;
        }
    }

    std::vector<double> ysorted(n), tmp(n);
    for (std::size_t i = 0; i < n; ++i) ysorted[i] = y[order[i]];
    const long long discordant = count_inversions(ysorted, tmp, 0, n);
    const long long concordant = n0 - n1 - n2 + n3 - discordant;
    r.concordant = concordant;
    r.discordant = discordant;

    const double denom =
        std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    r.tau_b = std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);

    // Tie-corrected variance of C - D (three-term form over tie groups).
    const auto nd = static_cast<double>(n);
    const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
    double var = (v0 - r.ties_x.sum_v - r.ties_y.sum_v) / 18.0;
    var += r.ties_x.sum_t1 * r.ties_y.sum_t1 / (2.0 * nd * (nd - 1.0));
    if (n > 2)
        var += r.ties_x.sum_t2 * r.ties_y.sum_t2 / (9.0 * nd * (nd - 1.0) * (nd - 2.0));

    if (var > 0.0) {
        r.z = static_cast<double>(concordant - discordant) / std::sqrt(var);
        r.p_two_sided = std::erfc(std::abs(r.z) / std::sqrt(2.0));
    } else {
        r.z = 0.0;
        r.p_two_sided = 1.0;
    }
    return r;
}

Distribution Distribution::uniform(double lo, double hi) {
    Distribution d;
    d.family = Family::uniform;
    d.a = lo;
    d.b = hi;
    return d;
}

Distribution Distribution::normal(double mean, double sd) {
    Distribution d;
    d.family = Family::normal;
    d.a = mean;
    d.b = sd;
    return d;
}

double Distribution::cdf(double x) const {
    switch (family) {
    case Family::uniform:
        if (x <= a) return 0.0;
        if (x >= b) return 1.0;
        return (x - a) / (b - a);
    case Family::normal:
        return normal_cdf((x - a) / b);
    }
    return 0.0;
}

std::string Distribution::describe() const {
    char buf[96];
    switch (family) {
    case Family::uniform:
        std::snprintf(buf, sizeof(buf), "uniform(%g, %g)", a, b);
        break;
    case Family::normal:
        std::snprintf(buf, sizeof(buf), "normal(%g, %g)", a, b);
        break;
    }
    return buf;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100000; ++k) {
        const double term = std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    const double q = 2.0 * sum;
    return std::min(1.0, std::max(0.0, q));
}

namespace {

KsResult ks_statistic(std::span<const double> x, const Distribution& ref, bool fitted) {
    const std::size_t n = x.size();
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = ref.cdf(sorted[i]);
        const double up = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        const double down = f - static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(up, down));
    }
    KsResult r;
    r.d_statistic = d;
    r.n = n;
    r.reference = fitted ? "normal-fitted " + ref.describe() : ref.describe();
    r.fitted_params = fitted;
    // Stephens small-sample adjustment of the asymptotic series argument.
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    r.p_value = kolmogorov_q(lambda);
    return r;
}

} // namespace

KsResult ks_test(std::span<const double> x, const Distribution& ref) {
    if (x.empty()) fail("EmptySample", "ks_test needs at least one observation");
    return ks_statistic(x, ref, false);
}

KsResult ks_test_normal_fitted(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) fail("EmptySample", "ks_test needs at least one observation");
    if (n < 3) fail("ZeroVariance", "fitting a normal needs n >= 3, got " + std::to_string(n));
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd <= 0.0) fail("ZeroVariance", "sample has zero variance; cannot fit a normal");
    return ks_statistic(x, Distribution::normal(mean, sd), true);
}

double lilliefors_mc_pvalue(std::span<const double> x, int replicates, std::uint64_t seed) {
    if (replicates < 1) fail("InvalidConfig", "replicates must be >= 1");
    const KsResult observed = ks_test_normal_fitted(x);
    Rng rng(seed);
    const std::size_t n = x.size();
    std::vector<double> sample(n);
    long long exceed = 0;
    for (int rep = 0; rep < replicates; ++rep) {
        for (auto& v : sample) v = rng.normal();
        const KsResult r = ks_test_normal_fitted(sample);
        if (r.d_statistic >= observed.d_statistic) ++exceed;
    }
    return static_cast<double>(exceed + 1) / static_cast<double>(replicates + 1);
}

CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns,
    double alpha, double noteworthy_tau) {
    if (columns.size() < 2)
        fail("LengthMismatch", "correlation_matrix needs at least 2 columns");
    const std::size_t len = columns.front().second.size();
    for (const auto& [name, col] : columns)
        if (col.size() != len)
            fail("LengthMismatch", "column '" + name + "' has " + std::to_string(col.size()) +
                                       " values, expected " + std::to_string(len));

    CorrelationMatrix m;
    m.alpha = alpha;
    m.noteworthy_tau = noteworthy_tau;
    const std::size_t k = columns.size();
    m.cells.assign(k, std::vector<CorrelationResult>(k));
    for (const auto& [name, col] : columns) m.names.push_back(name);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            if (i == j) {
                CorrelationResult self;
                self.tau_b = 1.0;
                self.n = len;
                self.p_two_sided = 0.0;
                m.cells[i][j] = self;
                continue;
            }
            const CorrelationResult r = kendall_tau_b(columns[i].second, columns[j].second);
            m.cells[i][j] = r;
            m.cells[j][i] = r;
        }
    }
    return m;
}

std::string format_cell(double tau, double p, double alpha, double noteworthy_tau) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", tau);
    std::string cell = buf;
    const bool starred = p < alpha;
    if (starred) cell += "*";
    if (starred && std::abs(tau) >= noteworthy_tau) cell = "**" + cell + "**";
    return cell;
}

namespace {
std::string alpha_string(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alpha);
    return buf;
}
} // namespace

std::string render_markdown(const CorrelationMatrix& m) {
    const std::size_t k = m.names.size();
    std::ostringstream os;
    os << "| Factor |";
    for (std::size_t j = 0; j < k; ++j) os << " " << j + 1 << " |";
    os << "\n|---|";
    for (std::size_t j = 0; j < k; ++j) os << "---|";
    os << "\n";
    for (std::size_t i = 0; i < k; ++i) {
        os << "| " << i + 1 << " " << m.names[i] << " |";
        for (std::size_t j = 0; j < k; ++j) {
            if (j < i) {
                os << "  |";
            } else if (j == i) {
                os << " 1.0 |";
            } else {
                const auto& r = m.cells[i][j];
                os << " " << format_cell(r.tau_b, r.p_two_sided, m.alpha, m.noteworthy_tau) << " |";
            }
        }
        os << "\n";
    }
    os << "\nNote: *p < " << alpha_string(m.alpha)
       << "; bold values represent noteworthy results\n";
    return os.str();
}

std::string to_json(const CorrelationMatrix& m) {
    json j;
    j["names"] = m.names;
    j["alpha"] = m.alpha;
    j["noteworthy_tau"] = m.noteworthy_tau;
    json pairs = json::array();
    const std::size_t k = m.names.size();
    const auto tie_json = [](const TieSummary& t) {
        return json{{"tied_pairs", t.pair_count},
                    {"sum_t1", t.sum_t1},
                    {"sum_t2", t.sum_t2},
                    {"sum_v", t.sum_v}};
    };
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t jd = i + 1; jd < k; ++jd) {
            const auto& r = m.cells[i][jd];
            pairs.push_back({{"x", m.names[i]},
                             {"y", m.names[jd]},
                             {"tau_b", r.tau_b},
                             {"concordant", r.concordant},
                             {"discordant", r.discordant},
                             {"ties_x", tie_json(r.ties_x)},
                             {"ties_y", tie_json(r.ties_y)},
                             {"n", r.n},
                             {"z", r.z},
                             {"p_two_sided", r.p_two_sided},
                             {"degenerate", r.degenerate},
                             {"significant", r.p_two_sided < m.alpha},
                             {"noteworthy", r.p_two_sided < m.alpha &&
                                                std::abs(r.tau_b) >= m.noteworthy_tau}});
        }
    }
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

} // namespace taskmap::stats
