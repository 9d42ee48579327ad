#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taskmap::model {

enum class WorkItemKind { support, defect, enhancement };

std::string to_string(WorkItemKind kind);
std::optional<WorkItemKind> parse_kind(std::string_view text);

struct WorkItem {
    std::string id;
    WorkItemKind kind = WorkItemKind::support;
    int iteration = 1;
    double time_taken_days = 0.0;
    double priority = 1.0; // real-valued, [1,4]
    int comment_count = 0;
    int developer_count = 1;
    int role_count = 1;
};

struct Message {
    std::string id;
    std::string work_item_id;
    std::string author_id;
    std::string text;
    std::string timestamp; // empty = absent
};

struct Dataset {
    std::vector<WorkItem> work_items;
    std::vector<Message> messages;
    int n_iterations = 30;
};

enum class Severity { error, warning };

struct Diagnostic {
    Severity severity = Severity::error;
    std::string file;   // "work_items" or "messages"
    int row = 0;        // 1-based data row; 0 = not row-specific
    std::string column; // offending column, when known
    std::string kind;   // SchemaError, ReferentialIntegrityError, ...
    std::string message;
};

std::string format(const Diagnostic& d);

// Ingestion is total: every input row is either accepted or yields exactly
// one error diagnostic. Warnings (comment_count reconciliation, empty
// message text) do not reject rows.
struct IngestResult {
    Dataset dataset;
    std::vector<Diagnostic> diagnostics;
    std::size_t work_item_rows = 0;
    std::size_t message_rows = 0;

    std::size_t error_count() const;
    std::size_t warning_count() const;
};

// Accepts the delimited-text schema or the structured-record (.json)
// variant; the format is chosen by file extension.
IngestResult ingest_dataset(const std::string& work_item_path,
                            const std::optional<std::string>& message_path = {});

struct ColumnStats {
    double mean = 0.0;
    double sd = 0.0; // sample sd, divisor n-1
    bool zero_variance = false;
};

struct FeatureMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> values;  // row-major, rectangular
    std::vector<ColumnStats> normalization;   // empty until zscore_normalize

    std::size_t n_rows() const { return values.size(); }
    std::size_t n_cols() const { return column_names.size(); }
    bool normalized() const { return !normalization.empty(); }
    std::vector<double> column(std::size_t j) const;
    std::size_t column_index(std::string_view name) const; // npos if absent
};

// Exactly six columns, in this order:
// iteration, time_taken, priority, comment_count, developer_count, role_count
FeatureMatrix build_feature_matrix(const Dataset& dataset);

// (x - mean) / sample sd per column; zero-variance columns become zeros and
// are flagged. The input matrix is left untouched.
FeatureMatrix zscore_normalize(const FeatureMatrix& matrix);

std::string to_json(const FeatureMatrix& m);
FeatureMatrix feature_matrix_from_json(const std::string& text);
void save_feature_matrix(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_feature_matrix(const std::string& path);

// Canonical writers for the delimited-text schemas (used by gen and the
// ingest subcommand). Deterministic byte output.
std::string work_items_csv(const std::vector<WorkItem>& items);
std::string messages_csv(const std::vector<Message>& messages);

std::string format_double(double v); // fixed "%.6g"-free stable formatting

} // namespace taskmap::model
