#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace taskmap::stats {

struct TieSummary {
    long long pair_count = 0; // sum t(t-1)/2 over tie groups
    double sum_t1 = 0.0;      // sum t(t-1)
    double sum_t2 = 0.0;      // sum t(t-1)(t-2)
    double sum_v = 0.0;       // sum t(t-1)(2t+5)
};

struct CorrelationResult {
    double tau_b = 0.0;
    long long concordant = 0;
    long long discordant = 0;
    TieSummary ties_x, ties_y;
    std::size_t n = 0;
    double z = 0.0;
    double p_two_sided = 1.0;
    bool degenerate = false; // either variable constant
};

// Tie-corrected tau with normal-approximation two-sided significance.
// O(n log n); concordant/discordant counts are exact.
CorrelationResult kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Fully specified continuous reference distribution for the KS test.
struct Distribution {
    enum class Family { uniform, normal };
    Family family = Family::normal;
    double a = 0.0; // uniform: lower bound; normal: mean
    double b = 1.0; // uniform: upper bound; normal: sd

    double cdf(double x) const;
    std::string describe() const;

    static Distribution uniform(double lo, double hi);
    static Distribution normal(double mean, double sd);
};

struct KsResult {
    double d_statistic = 0.0;
    std::size_t n = 0;
    double p_value = 1.0;
    std::string reference;
    bool fitted_params = false; // p is anti-conservative (Lilliefors caveat)
};

KsResult ks_test(std::span<const double> x, const Distribution& ref);

// Mean and sd estimated from the sample (sd via n-1); requires n >= 3 and
// a positive sd. The asymptotic p carries the Lilliefors caveat.
KsResult ks_test_normal_fitted(std::span<const double> x);

// Monte Carlo p for the fitted-normal case: replicates of n standard
// normals, each refitted and retested; p = fraction with D* >= observed D.
double lilliefors_mc_pvalue(std::span<const double> x, int replicates, std::uint64_t seed);

// Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
// truncated when a term drops below 1e-12; clamped to [0,1].
double kolmogorov_q(double lambda);

double normal_cdf(double z);

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<CorrelationResult>> cells; // full symmetric matrix
    double alpha = 0.05;
    double noteworthy_tau = 0.30;
};

CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns,
    double alpha = 0.05, double noteworthy_tau = 0.30);

// One upper-triangle cell: tau to 2 decimals, '*' when p < alpha, bold when
// additionally |tau| >= noteworthy.
std::string format_cell(double tau, double p, double alpha, double noteworthy_tau);

// Markdown table with numbered factor rows, upper triangle and the
// "*p < 0.05" footnote.
std::string render_markdown(const CorrelationMatrix& m);
std::string to_json(const CorrelationMatrix& m);

} // namespace taskmap::stats
