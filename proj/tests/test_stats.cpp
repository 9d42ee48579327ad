#include <doctest.h>

#include "taskmap/errors.hpp"
#include "taskmap/rng.hpp"
#include "taskmap/stats.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <cmath>

using namespace taskmap;

TEST_CASE("tau: perfect concordance and discordance") {
    const std::vector<double> x = {1, 2, 3, 4};
    const std::vector<double> rev = {4, 3, 2, 1};
    CHECK(stats::kendall_tau_b(x, x).tau_b == 1.0);
    CHECK(stats::kendall_tau_b(x, rev).tau_b == -1.0);
}

TEST_CASE("tau: worked tied example") {
    const std::vector<double> x = {1, 2, 2, 3};
    const std::vector<double> y = {1, 2, 3, 3};
    const auto r = stats::kendall_tau_b(x, y);
    CHECK(r.concordant == 4);
    CHECK(r.discordant == 0);
    CHECK(r.ties_x.pair_count == 1);
    CHECK(r.ties_y.pair_count == 1);
    CHECK(r.tau_b == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("tau: matches the quadratic oracle on random tied vectors") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 48));
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = std::floor(rng.uniform(0, 10)); // coarse grid forces ties
        for (auto& v : y) v = std::floor(rng.uniform(0, 10));
        const auto prod = stats::kendall_tau_b(x, y);
        const auto ref = oracle::kendall_tau_brute(x, y);
        CHECK(prod.degenerate == ref.degenerate);
        if (ref.degenerate) continue;
        CHECK(prod.concordant == ref.concordant);
        CHECK(prod.discordant == ref.discordant);
        CHECK(std::abs(prod.tau_b - ref.tau_b) < 1e-12);
        CHECK(std::abs(prod.z - ref.z) < 1e-12);
        CHECK(std::abs(prod.p_two_sided - ref.p_two_sided) < 1e-12);
    }
}

TEST_CASE("tau: symmetry is exact") {
    Rng rng(7);
    std::vector<double> x(37), y(37);
    for (auto& v : x) v = std::floor(rng.uniform(0, 6));
    for (auto& v : y) v = rng.normal();
    const auto a = stats::kendall_tau_b(x, y);
    const auto b = stats::kendall_tau_b(y, x);
    CHECK(a.tau_b == b.tau_b);
    CHECK(a.p_two_sided == b.p_two_sided);
}

TEST_CASE("tau: strictly increasing transforms leave everything unchanged") {
    Rng rng(8);
    std::vector<double> x(40), y(40);
    for (auto& v : x) v = std::floor(rng.uniform(-5, 5));
    for (auto& v : y) v = std::floor(rng.uniform(0, 9));
    std::vector<double> tx(x);
    for (auto& v : tx) v = 3.0 * v + 17.0; // strictly increasing, tie-preserving
    const auto a = stats::kendall_tau_b(x, y);
    const auto b = stats::kendall_tau_b(tx, y);
    CHECK(a.tau_b == b.tau_b);
    CHECK(a.concordant == b.concordant);
    CHECK(a.discordant == b.discordant);
}

TEST_CASE("tau: constant input is degenerate") {
    const std::vector<double> c = {2, 2, 2, 2};
    const std::vector<double> y = {1, 2, 3, 4};
    const auto r = stats::kendall_tau_b(c, y);
    CHECK(r.degenerate);
    CHECK(r.tau_b == 0.0);
    CHECK(r.p_two_sided == 1.0);
}

TEST_CASE("tau: length and size errors") {
    const std::vector<double> a = {1, 2, 3};
    const std::vector<double> b = {1, 2};
    try {
        stats::kendall_tau_b(a, b);
        FAIL("expected LengthMismatch");
    } catch (const DataError& e) {
        CHECK(e.kind() == "LengthMismatch");
    }
    const std::vector<double> one = {1};
    try {
        stats::kendall_tau_b(one, one);
        FAIL("expected TooShort");
    } catch (const DataError& e) {
        CHECK(e.kind() == "TooShort");
    }
}

TEST_CASE("tau significance calibration under the permutation null") {
    // n = 30 i.i.d. continuous pairs; two-sided rejection at 0.05 should
    // land in 0.05 +/- 0.02 over 5000 replicates.
    Rng rng(555);
    const int replicates = 5000;
    int rejected = 0;
    std::vector<double> x(30), y(30);
    for (int rep = 0; rep < replicates; ++rep) {
        for (auto& v : x) v = rng.uniform();
        for (auto& v : y) v = rng.uniform();
        if (stats::kendall_tau_b(x, y).p_two_sided < 0.05) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / replicates;
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
}

TEST_CASE("ks: hand cases against Uniform(0,1)") {
    const std::vector<double> single = {0.5};
    CHECK(stats::ks_test(single, stats::Distribution::uniform(0, 1)).d_statistic == 0.5);

    const std::vector<double> three = {0.1, 0.2, 0.3};
    CHECK(stats::ks_test(three, stats::Distribution::uniform(0, 1)).d_statistic ==
          doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("ks: sample at reference quantiles gives D = 0.5/n") {
    for (std::size_t n : {1u, 4u, 7u, 25u}) {
        std::vector<double> x;
        for (std::size_t i = 1; i <= n; ++i)
            x.push_back((static_cast<double>(i) - 0.5) / static_cast<double>(n));
        const auto r = stats::ks_test(x, stats::Distribution::uniform(0, 1));
        CHECK(std::abs(r.d_statistic - 0.5 / static_cast<double>(n)) < 1e-12);
    }
}

TEST_CASE("ks: D matches the dense-grid oracle within 1e-9") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 40));
        std::vector<double> x(n);
        const bool use_normal = trial % 2 == 0;
        const auto ref = use_normal ? stats::Distribution::normal(0.3, 1.7)
                                    : stats::Distribution::uniform(-2, 5);
        for (auto& v : x) v = use_normal ? rng.normal(0.0, 2.0) : rng.uniform(-3, 6);
        const auto r = stats::ks_test(x, ref);
        const double grid = oracle::ks_d_grid(x, [&](double t) { return ref.cdf(t); });
        CHECK(std::abs(r.d_statistic - grid) < 1e-9);
    }
}

TEST_CASE("ks: null calibration at n = 100") {
    Rng rng(808);
    const int replicates = 5000;
    int rejected = 0;
    std::vector<double> x(100);
    const auto ref = stats::Distribution::uniform(0, 1);
    for (int rep = 0; rep < replicates; ++rep) {
        for (auto& v : x) v = rng.uniform();
        if (stats::ks_test(x, ref).p_value < 0.05) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / replicates;
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
}

TEST_CASE("kolmogorov series truncation agrees with a 1000-term sum") {
    for (double lambda = 0.05; lambda < 3.0; lambda += 0.037) {
        double sum = 0.0, sign = 1.0;
        for (int k = 1; k <= 1000; ++k) {
            sum += sign * std::exp(-2.0 * k * k * lambda * lambda);
            sign = -sign;
        }
        const double full = std::min(1.0, std::max(0.0, 2.0 * sum));
        CHECK(std::abs(stats::kolmogorov_q(lambda) - full) < 1e-10);
    }
    CHECK(stats::kolmogorov_q(0.0) == 1.0);
}

TEST_CASE("ks: normal-fitted flags the Lilliefors caveat and rejects degenerate input") {
    Rng rng(4);
    std::vector<double> x(50);
    for (auto& v : x) v = rng.normal(10, 2);
    const auto r = stats::ks_test_normal_fitted(x);
    CHECK(r.fitted_params);
    CHECK(r.reference.find("normal-fitted") != std::string::npos);

    const std::vector<double> flat = {3, 3, 3, 3};
    try {
        stats::ks_test_normal_fitted(flat);
        FAIL("expected ZeroVariance");
    } catch (const DataError& e) {
        CHECK(e.kind() == "ZeroVariance");
    }
    try {
        stats::ks_test(std::vector<double>{}, stats::Distribution::uniform(0, 1));
        FAIL("expected EmptySample");
    } catch (const DataError& e) {
        CHECK(e.kind() == "EmptySample");
    }
}

TEST_CASE("ks: Monte Carlo Lilliefors p is reproducible and sane") {
    Rng rng(14);
    std::vector<double> x(40);
    for (auto& v : x) v = std::exp(rng.normal(0, 0.6)); // clearly non-normal
    const double p1 = stats::lilliefors_mc_pvalue(x, 400, 9);
    const double p2 = stats::lilliefors_mc_pvalue(x, 400, 9);
    CHECK(p1 == p2);
    CHECK(p1 >= 0.0);
    CHECK(p1 <= 1.0);
    CHECK(p1 < 0.05); // lognormal sample, n = 40: normality should fail

    std::vector<double> good(60);
    for (auto& v : good) v = rng.normal(3, 1.5);
    CHECK(stats::lilliefors_mc_pvalue(good, 400, 9) > 0.05);
}

TEST_CASE("format_cell follows the star and emphasis rules") {
    CHECK(stats::format_cell(0.304, 0.012, 0.05, 0.30) == "**0.30***");
    CHECK(stats::format_cell(0.75, 0.0001, 0.05, 0.30) == "**0.75***");
    CHECK(stats::format_cell(0.10, 0.012, 0.05, 0.30) == "0.10*");  // starred, not noteworthy
    CHECK(stats::format_cell(0.35, 0.20, 0.05, 0.30) == "0.35");    // big but not significant
    CHECK(stats::format_cell(-0.42, 0.001, 0.05, 0.30) == "**-0.42***");
    CHECK(stats::format_cell(-0.20, 0.30, 0.05, 0.30) == "-0.20");
}

TEST_CASE("correlation_matrix: diagonal, symmetry, rendering") {
    Rng rng(31);
    std::vector<double> a(80), b(80), c(80);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = a[i] * 0.8 + 0.4 * rng.normal(); // strongly related
        c[i] = rng.normal();
    }
    const auto m = stats::correlation_matrix({{"alpha", a}, {"beta", b}, {"gamma", c}});
    CHECK(m.cells[0][0].tau_b == 1.0);
    CHECK(m.cells[1][1].tau_b == 1.0);
    CHECK(m.cells[0][1].tau_b == m.cells[1][0].tau_b);

    const auto md = stats::render_markdown(m);
    CHECK(md.find("| Factor |") != std::string::npos);
    CHECK(md.find("1 alpha") != std::string::npos);
    CHECK(md.find("*p < 0.05") != std::string::npos);
    CHECK(md.find("noteworthy") != std::string::npos);
    // upper triangle only: the row for the last factor has empty leading cells
    CHECK(md.find("| 3 gamma |  |  | 1.0 |") != std::string::npos);

    const auto js = stats::to_json(m);
    CHECK(js.find("\"pairs\"") != std::string::npos);
    CHECK(js.find("alpha") != std::string::npos);
}

TEST_CASE("correlation_matrix: mismatched column lengths fail") {
    try {
        stats::correlation_matrix({{"a", {1, 2, 3}}, {"b", {1, 2}}});
        FAIL("expected LengthMismatch");
    } catch (const DataError& e) {
        CHECK(e.kind() == "LengthMismatch");
    }
}
