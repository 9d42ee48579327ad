#include <doctest.h>

#include "taskmap/errors.hpp"
#include "taskmap/model.hpp"
#include "taskmap/rng.hpp"
#include "taskmap/stats.hpp"

#include "test_support.hpp"

#include <cmath>

using namespace taskmap;

namespace {

const char* kTwoRowFile =
    "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
    "a,support,1,35.0,3.0,5,2,2\n"
    "b,defect,2,10.5,1.0,0,1,1\n";

} // namespace

TEST_CASE("ingest: minimal valid work-item file") {
    const auto dir = testsup::temp_dir("ingest_minimal");
    testsup::write_file(dir + "/wi.csv", kTwoRowFile);
    const auto r = model::ingest_dataset(dir + "/wi.csv");
    CHECK(r.dataset.work_items.size() == 2);
    CHECK(r.dataset.messages.empty());
    CHECK(r.diagnostics.empty());
    CHECK(r.dataset.work_items[0].id == "a");
    CHECK(r.dataset.work_items[0].kind == model::WorkItemKind::support);
    CHECK(r.dataset.work_items[1].time_taken_days == doctest::Approx(10.5));
    CHECK(r.dataset.n_iterations == 30); // default floor
}

TEST_CASE("ingest: priority outside [1,4] rejects the row with a diagnostic") {
    const auto dir = testsup::temp_dir("ingest_priority");
    testsup::write_file(
        dir + "/wi.csv",
        "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
        "a,support,1,35.0,7,5,2,2\n"
        "b,defect,2,10.5,1.0,0,1,1\n");
    const auto r = model::ingest_dataset(dir + "/wi.csv");
    CHECK(r.dataset.work_items.size() == 1);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == "SchemaError");
    CHECK(r.diagnostics[0].row == 1);
    CHECK(r.diagnostics[0].column == "priority");
    CHECK(r.diagnostics[0].message.find("priority within [1,4]") != std::string::npos);
}

TEST_CASE("ingest: declared comment_count disagrees with messages") {
    const auto dir = testsup::temp_dir("ingest_comment_mismatch");
    testsup::write_file(
        dir + "/wi.csv",
        "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
        "a,support,1,35.0,3.0,3,2,2\n");
    testsup::write_file(dir + "/msg.csv",
                        "id,work_item_id,author_id,timestamp,text\n"
                        "m1,a,p1,,hello there\n"
                        "m2,a,p1,,more text\n");
    const auto r = model::ingest_dataset(dir + "/wi.csv", dir + "/msg.csv");
    REQUIRE(r.dataset.work_items.size() == 1);
    // messages are authoritative: warning diagnostic naming the item, count reconciled
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == "ReferentialIntegrityError");
    CHECK(r.diagnostics[0].severity == model::Severity::warning);
    CHECK(r.diagnostics[0].message.find("'a'") != std::string::npos);
    CHECK(r.dataset.work_items[0].comment_count == 2);
}

TEST_CASE("ingest: message referencing an unknown item is rejected") {
    const auto dir = testsup::temp_dir("ingest_refint");
    testsup::write_file(dir + "/wi.csv", kTwoRowFile);
    testsup::write_file(dir + "/msg.csv",
                        "id,work_item_id,author_id,timestamp,text\n"
                        "m1,nosuch,p1,,hello\n");
    const auto r = model::ingest_dataset(dir + "/wi.csv", dir + "/msg.csv");
    CHECK(r.dataset.messages.empty());
    bool found = false;
    for (const auto& d : r.diagnostics)
        if (d.kind == "ReferentialIntegrityError" && d.severity == model::Severity::error &&
            d.message.find("m1") != std::string::npos)
            found = true;
    CHECK(found);
}

TEST_CASE("ingest is total: accepted rows + error diagnostics = input rows") {
    const auto dir = testsup::temp_dir("ingest_total");
    testsup::write_file(
        dir + "/wi.csv",
        "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
        "a,support,1,35.0,3.0,0,2,2\n"
        "b,gadget,1,35.0,3.0,0,2,2\n"      // bad kind
        "c,defect,0,35.0,3.0,0,2,2\n"      // bad iteration
        "d,defect,2,-1,3.0,0,2,2\n"        // bad time
        "a,defect,2,1.0,3.0,0,2,2\n"       // duplicate id
        "e,enhancement,3,1.0,2.5,1,3,2\n");
    const auto r = model::ingest_dataset(dir + "/wi.csv");
    CHECK(r.work_item_rows == 6);
    CHECK(r.dataset.work_items.size() + r.error_count() == r.work_item_rows);
    CHECK(r.dataset.work_items.size() == 2);
}

TEST_CASE("ingest: missing file and bad header") {
    CHECK_THROWS_AS(model::ingest_dataset("/nonexistent/file.csv"), DataError);
    try {
        model::ingest_dataset("/nonexistent/file.csv");
    } catch (const DataError& e) {
        CHECK(e.kind() == "MissingFile");
    }
    const auto dir = testsup::temp_dir("ingest_header");
    testsup::write_file(dir + "/wi.csv", "id,kind\na,support\n");
    CHECK_THROWS_AS(model::ingest_dataset(dir + "/wi.csv"), DataError);
}

TEST_CASE("ingest: structured-record variant matches the delimited one") {
    const auto dir = testsup::temp_dir("ingest_json");
    testsup::write_file(dir + "/wi.csv", kTwoRowFile);
    testsup::write_file(dir + "/wi.json", R"({"work_items": [
        {"id":"a","kind":"support","iteration":1,"time_taken_days":35.0,"priority":3.0,
         "comment_count":5,"developer_count":2,"role_count":2},
        {"id":"b","kind":"defect","iteration":2,"time_taken_days":10.5,"priority":1.0,
         "comment_count":0,"developer_count":1,"role_count":1}]})");
    const auto a = model::ingest_dataset(dir + "/wi.csv");
    const auto b = model::ingest_dataset(dir + "/wi.json");
    REQUIRE(a.dataset.work_items.size() == b.dataset.work_items.size());
    CHECK(model::work_items_csv(a.dataset.work_items) ==
          model::work_items_csv(b.dataset.work_items));
}

TEST_CASE("ingest: empty message text is accepted but flagged degenerate") {
    const auto dir = testsup::temp_dir("ingest_empty_text");
    testsup::write_file(
        dir + "/wi.csv",
        "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
        "a,support,1,35.0,3.0,1,2,2\n");
    testsup::write_file(dir + "/msg.csv", "id,work_item_id,author_id,timestamp,text\n"
                                          "m1,a,p1,,\n");
    const auto r = model::ingest_dataset(dir + "/wi.csv", dir + "/msg.csv");
    CHECK(r.dataset.messages.size() == 1);
    bool degenerate = false;
    for (const auto& d : r.diagnostics)
        if (d.kind == "DegenerateText" && d.severity == model::Severity::warning) degenerate = true;
    CHECK(degenerate);
}

TEST_CASE("build_feature_matrix: field copy, shape, and column order") {
    model::Dataset ds;
    ds.work_items.push_back({"w1", model::WorkItemKind::support, 1, 35.0, 3.0, 5, 2, 2});
    const auto m = model::build_feature_matrix(ds);
    REQUIRE(m.n_rows() == 1);
    REQUIRE(m.n_cols() == 6);
    CHECK(m.column_names == std::vector<std::string>{"iteration", "time_taken", "priority",
                                                     "comment_count", "developer_count",
                                                     "role_count"});
    CHECK(m.values[0] == std::vector<double>{1, 35.0, 3, 5, 2, 2});

    for (int i = 0; i < 7; ++i)
        ds.work_items.push_back({"x" + std::to_string(i), model::WorkItemKind::defect, 1 + i,
                                 1.0 * i, 2.0, i, 1 + i, 1});
    const auto m8 = model::build_feature_matrix(ds);
    CHECK(m8.n_rows() == 8);
    CHECK(m8.n_cols() == 6);
}

TEST_CASE("build_feature_matrix: empty dataset is an error") {
    try {
        model::build_feature_matrix(model::Dataset{});
        FAIL("expected EmptyDataset");
    } catch (const DataError& e) {
        CHECK(e.kind() == "EmptyDataset");
    }
}

TEST_CASE("ingest + build is deterministic, byte-identical serialization") {
    const auto dir = testsup::temp_dir("model_determinism");
    testsup::write_file(dir + "/wi.csv", kTwoRowFile);
    const auto m1 = model::build_feature_matrix(model::ingest_dataset(dir + "/wi.csv").dataset);
    const auto m2 = model::build_feature_matrix(model::ingest_dataset(dir + "/wi.csv").dataset);
    CHECK(model::to_json(m1) == model::to_json(m2));
    CHECK(model::to_json(m1) ==
          testsup::read_file(std::string(TASKMAP_SOURCE_DIR) +
                             "/tests/golden/features_two_rows.json"));
}

TEST_CASE("zscore_normalize: hand-computed column") {
    model::FeatureMatrix m;
    m.column_names = {"v"};
    m.row_ids = {"a", "b", "c"};
    m.values = {{1.0}, {2.0}, {3.0}};
    const auto z = model::zscore_normalize(m);
    CHECK(z.values[0][0] == -1.0);
    CHECK(z.values[1][0] == 0.0);
    CHECK(z.values[2][0] == 1.0);
    CHECK(z.normalization[0].mean == 2.0);
    CHECK(z.normalization[0].sd == 1.0);
    CHECK_FALSE(z.normalization[0].zero_variance);
    // input untouched
    CHECK(m.values[0][0] == 1.0);
}

TEST_CASE("zscore_normalize: constant column becomes zeros with a flag") {
    model::FeatureMatrix m;
    m.column_names = {"v"};
    m.row_ids = {"a", "b", "c", "d"};
    m.values = {{5.0}, {5.0}, {5.0}, {5.0}};
    const auto z = model::zscore_normalize(m);
    for (const auto& row : z.values) CHECK(row[0] == 0.0);
    CHECK(z.normalization[0].zero_variance);
}

TEST_CASE("zscore_normalize: idempotent within 1e-9 and rejects tiny input") {
    Rng rng(77);
    model::FeatureMatrix m;
    m.column_names = {"a", "b"};
    for (int i = 0; i < 40; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        m.values.push_back({rng.uniform(0, 10), rng.normal(5, 2)});
    }
    const auto z1 = model::zscore_normalize(m);
    const auto z2 = model::zscore_normalize(z1);
    for (std::size_t i = 0; i < z1.n_rows(); ++i)
        for (std::size_t j = 0; j < z1.n_cols(); ++j)
            CHECK(std::abs(z1.values[i][j] - z2.values[i][j]) < 1e-9);

    model::FeatureMatrix tiny;
    tiny.column_names = {"a"};
    tiny.row_ids = {"r"};
    tiny.values = {{1.0}};
    try {
        model::zscore_normalize(tiny);
        FAIL("expected TooFewRows");
    } catch (const DataError& e) {
        CHECK(e.kind() == "TooFewRows");
    }
}

TEST_CASE("zscore_normalize: non-constant columns have mean 0 and sample sd 1") {
    Rng rng(3);
    model::FeatureMatrix m;
    m.column_names = {"a", "b", "c"};
    for (int i = 0; i < 25; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        m.values.push_back({rng.normal(100, 7), rng.uniform(-4, 9), rng.normal(0, 0.01)});
    }
    const auto z = model::zscore_normalize(m);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0;
        for (const auto& row : z.values) mean += row[j];
        mean /= static_cast<double>(z.n_rows());
        double ss = 0;
        for (const auto& row : z.values) ss += (row[j] - mean) * (row[j] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(z.n_rows() - 1));
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(sd - 1.0) < 1e-9);
    }
}

TEST_CASE("zscore_normalize preserves Kendall tau-b of every column pair") {
    Rng rng(11);
    model::FeatureMatrix m;
    m.column_names = {"a", "b", "c"};
    for (int i = 0; i < 60; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        // modest grid so accidental float merges cannot occur
        m.values.push_back({std::floor(rng.uniform(0, 50)), std::floor(rng.uniform(0, 8)),
                            std::floor(rng.normal(20, 6))});
    }
    const auto z = model::zscore_normalize(m);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b) {
            const auto r_raw = stats::kendall_tau_b(m.column(a), m.column(b));
            const auto r_norm = stats::kendall_tau_b(z.column(a), z.column(b));
            CHECK(r_raw.tau_b == r_norm.tau_b);
            CHECK(r_raw.concordant == r_norm.concordant);
            CHECK(r_raw.discordant == r_norm.discordant);
        }
}

TEST_CASE("feature matrix JSON round-trips bit-exactly") {
    Rng rng(5);
    model::FeatureMatrix m;
    m.column_names = {"a", "b"};
    for (int i = 0; i < 10; ++i) {
        m.row_ids.push_back("r" + std::to_string(i));
        m.values.push_back({rng.normal(), rng.uniform(-1e6, 1e6)});
    }
    const auto z = model::zscore_normalize(m);
    const auto text = model::to_json(z);
    const auto back = model::feature_matrix_from_json(text);
    CHECK(back.values == z.values);
    REQUIRE(back.normalization.size() == z.normalization.size());
    for (std::size_t j = 0; j < z.normalization.size(); ++j) {
        CHECK(back.normalization[j].mean == z.normalization[j].mean);
        CHECK(back.normalization[j].sd == z.normalization[j].sd);
    }
    CHECK(model::to_json(back) == text);
}

TEST_CASE("messages csv writer round-trips quoting") {
    std::vector<model::Message> msgs;
    msgs.push_back({"m1", "a", "p1", "says \"hi\", twice\nand more", "2006-01-02T03:04:05"});
    const auto text = model::messages_csv(msgs);
    const auto dir = testsup::temp_dir("msg_roundtrip");
    testsup::write_file(
        dir + "/wi.csv",
        "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n"
        "a,support,1,35.0,3.0,1,2,2\n");
    testsup::write_file(dir + "/msg.csv", text);
    const auto r = model::ingest_dataset(dir + "/wi.csv", dir + "/msg.csv");
    REQUIRE(r.dataset.messages.size() == 1);
    CHECK(r.dataset.messages[0].text == "says \"hi\", twice\nand more");
    CHECK(r.dataset.messages[0].timestamp == "2006-01-02T03:04:05");
}
