#include "taskmap/model.hpp"

#include "taskmap/csv.hpp"
#include "taskmap/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

using nlohmann::json;

namespace taskmap::model {

std::string to_string(WorkItemKind kind) {
    switch (kind) {
    case WorkItemKind::support: return "support";
    case WorkItemKind::defect: return "defect";
    case WorkItemKind::enhancement: return "enhancement";
    }
    return "support";
}

std::optional<WorkItemKind> parse_kind(std::string_view text) {
    if (text == "support") return WorkItemKind::support;
    if (text == "defect") return WorkItemKind::defect;
    if (text == "enhancement") return WorkItemKind::enhancement;
    return std::nullopt;
}

std::string format(const Diagnostic& d) {
    std::ostringstream os;
    os << (d.severity == Severity::error ? "error" : "warning") << " [" << d.kind << "] "
       << d.file;
    if (d.row > 0) os << " row " << d.row;
    if (!d.column.empty()) os << " column " << d.column;
    os << ": " << d.message;
    return os.str();
}

std::size_t IngestResult::error_count() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics)
        if (d.severity == Severity::error) ++n;
    return n;
}

std::size_t IngestResult::warning_count() const {
    return diagnostics.size() - error_count();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

namespace {

bool parse_int_strict(std::string_view s, int& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

bool parse_double_strict(std::string_view s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

const std::vector<std::string> kWorkItemHeader = {
    "id", "kind", "iteration", "time_taken_days", "priority",
    "comment_count", "developer_count", "role_count"};

const std::vector<std::string> kMessageHeader = {
    "id", "work_item_id", "author_id", "timestamp", "text"};

bool has_extension(const std::string& path, const char* ext) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return false;
    std::string e = path.substr(dot);
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

struct FieldError {
    std::string column;
    std::string reason;
};

// First invariant violation wins; each rejected row yields one diagnostic.
std::optional<FieldError> validate_work_item_fields(
    const std::string& id, const std::string& kind_s, const std::string& iter_s,
    const std::string& time_s, const std::string& prio_s, const std::string& comments_s,
    const std::string& devs_s, const std::string& roles_s, WorkItem& out) {
    if (id.empty()) return FieldError{"id", "id must be non-empty"};
    out.id = id;
    auto kind = parse_kind(kind_s);
    if (!kind) return FieldError{"kind", "kind must be one of support|defect|enhancement, got '" + kind_s + "'"};
    out.kind = *kind;
    if (!parse_int_strict(iter_s, out.iteration) || out.iteration < 1)
        return FieldError{"iteration", "iteration must be an integer >= 1, got '" + iter_s + "'"};
    if (!parse_double_strict(time_s, out.time_taken_days) || out.time_taken_days < 0.0)
        return FieldError{"time_taken_days", "time_taken_days must be a real >= 0, got '" + time_s + "'"};
    if (!parse_double_strict(prio_s, out.priority) || out.priority < 1.0 || out.priority > 4.0)
        return FieldError{"priority", "priority within [1,4] violated, got '" + prio_s + "'"};
    if (!parse_int_strict(comments_s, out.comment_count) || out.comment_count < 0)
        return FieldError{"comment_count", "comment_count must be an integer >= 0, got '" + comments_s + "'"};
    if (!parse_int_strict(devs_s, out.developer_count) || out.developer_count < 1)
        return FieldError{"developer_count", "developer_count must be an integer >= 1, got '" + devs_s + "'"};
    if (!parse_int_strict(roles_s, out.role_count) || out.role_count < 1)
        return FieldError{"role_count", "role_count must be an integer >= 1, got '" + roles_s + "'"};
    return std::nullopt;
}

std::string read_whole_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("MissingFile", "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Rows as (row_number, fields) regardless of the on-disk format.
using RawRows = std::vector<std::vector<std::string>>;

RawRows load_work_item_rows(const std::string& path) {
    if (has_extension(path, ".json")) {
        json j = json::parse(read_whole_file(path), nullptr, false);
        if (j.is_discarded()) fail("SchemaError", path + ": invalid JSON");
        const json* arr = nullptr;
        if (j.is_array()) arr = &j;
        else if (j.is_object() && j.contains("work_items") && j["work_items"].is_array())
            arr = &j["work_items"];
        else
            fail("SchemaError", path + ": expected an array or an object with a work_items array");
        RawRows rows;
        for (const auto& rec : *arr) {
            std::vector<std::string> fields;
            for (const auto& name : kWorkItemHeader) {
                if (!rec.contains(name)) {
                    fields.push_back("");
                    continue;
                }
                const auto& v = rec[name];
                if (v.is_string()) fields.push_back(v.get<std::string>());
                else fields.push_back(v.dump());
            }
            rows.push_back(std::move(fields));
        }
        return rows;
    }
    csv::Table t = csv::read_file(path);
    if (t.header != kWorkItemHeader)
        fail("SchemaError", path + ": header must be exactly 'id,kind,iteration,time_taken_days,"
                            "priority,comment_count,developer_count,role_count'");
    return std::move(t.rows);
}

RawRows load_message_rows(const std::string& path) {
    if (has_extension(path, ".json")) {
        json j = json::parse(read_whole_file(path), nullptr, false);
        if (j.is_discarded()) fail("SchemaError", path + ": invalid JSON");
        const json* arr = nullptr;
        if (j.is_array()) arr = &j;
        else if (j.is_object() && j.contains("messages") && j["messages"].is_array())
            arr = &j["messages"];
        else
            fail("SchemaError", path + ": expected an array or an object with a messages array");
        RawRows rows;
        for (const auto& rec : *arr) {
            std::vector<std::string> fields;
            for (const auto& name : kMessageHeader) {
                if (!rec.contains(name)) {
                    fields.push_back("");
                    continue;
                }
                const auto& v = rec[name];
                if (v.is_string()) fields.push_back(v.get<std::string>());
                else fields.push_back(v.dump());
            }
            rows.push_back(std::move(fields));
        }
        return rows;
    }
    csv::Table t = csv::read_file(path);
    if (t.header != kMessageHeader)
        fail("SchemaError", path + ": header must be exactly 'id,work_item_id,author_id,timestamp,text'");
    return std::move(t.rows);
}

} // namespace

IngestResult ingest_dataset(const std::string& work_item_path,
                            const std::optional<std::string>& message_path) {
    IngestResult result;

    RawRows wi_rows = load_work_item_rows(work_item_path);
    result.work_item_rows = wi_rows.size();

    std::unordered_set<std::string> seen_ids;
    std::unordered_map<std::string, std::size_t> item_index;
    for (std::size_t i = 0; i < wi_rows.size(); ++i) {
        const int row_no = static_cast<int>(i) + 1;
        const auto& f = wi_rows[i];
        if (f.size() != kWorkItemHeader.size()) {
            result.diagnostics.push_back({Severity::error, "work_items", row_no, "",
                                          "SchemaError",
                                          "expected 8 fields, got " + std::to_string(f.size())});
            continue;
        }
        WorkItem item;
        auto err = validate_work_item_fields(f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], item);
        if (err) {
            result.diagnostics.push_back({Severity::error, "work_items", row_no, err->column,
                                          "SchemaError", err->reason});
            continue;
        }
        if (!seen_ids.insert(item.id).second) {
            result.diagnostics.push_back({Severity::error, "work_items", row_no, "id",
                                          "SchemaError", "duplicate work item id '" + item.id + "'"});
            continue;
        }
        item_index[item.id] = result.dataset.work_items.size();
        result.dataset.work_items.push_back(std::move(item));
    }

    if (message_path) {
        RawRows msg_rows = load_message_rows(*message_path);
        result.message_rows = msg_rows.size();
        std::unordered_set<std::string> seen_msg_ids;
        std::unordered_map<std::string, int> observed_comments;
        for (std::size_t i = 0; i < msg_rows.size(); ++i) {
            const int row_no = static_cast<int>(i) + 1;
            const auto& f = msg_rows[i];
            if (f.size() != kMessageHeader.size()) {
                result.diagnostics.push_back({Severity::error, "messages", row_no, "",
                                              "SchemaError",
                                              "expected 5 fields, got " + std::to_string(f.size())});
                continue;
            }
            Message msg{f[0], f[1], f[2], f[4], f[3]};
            if (msg.id.empty()) {
                result.diagnostics.push_back({Severity::error, "messages", row_no, "id",
                                              "SchemaError", "id must be non-empty"});
                continue;
            }
            if (!seen_msg_ids.insert(msg.id).second) {
                result.diagnostics.push_back({Severity::error, "messages", row_no, "id",
                                              "SchemaError", "duplicate message id '" + msg.id + "'"});
                continue;
            }
            if (item_index.find(msg.work_item_id) == item_index.end()) {
                result.diagnostics.push_back({Severity::error, "messages", row_no, "work_item_id",
                                              "ReferentialIntegrityError",
                                              "message '" + msg.id + "' references unknown work item '" +
                                                  msg.work_item_id + "'"});
                continue;
            }
            if (msg.text.empty()) {
                result.diagnostics.push_back({Severity::warning, "messages", row_no, "text",
                                              "DegenerateText",
                                              "message '" + msg.id + "' has empty text"});
            }
            observed_comments[msg.work_item_id] += 1;
            result.dataset.messages.push_back(std::move(msg));
        }

        // Messages are authoritative for communication volume: mismatches are
        // reported and the declared count is replaced by the observed one.
        for (auto& item : result.dataset.work_items) {
            const auto it = observed_comments.find(item.id);
            const int observed = it == observed_comments.end() ? 0 : it->second;
            if (item.comment_count != observed) {
                result.diagnostics.push_back(
                    {Severity::warning, "work_items", 0, "comment_count",
                     "ReferentialIntegrityError",
                     "work item '" + item.id + "' declares comment_count=" +
                         std::to_string(item.comment_count) + " but " + std::to_string(observed) +
                         " messages reference it; using the message count"});
                item.comment_count = observed;
            }
        }
    }

    int max_iter = 0;
    for (const auto& item : result.dataset.work_items)
        max_iter = std::max(max_iter, item.iteration);
    result.dataset.n_iterations = std::max(30, max_iter);

    return result;
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row.at(j));
    return out;
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
    for (std::size_t j = 0; j < column_names.size(); ++j)
        if (column_names[j] == name) return j;
    return static_cast<std::size_t>(-1);
}

FeatureMatrix build_feature_matrix(const Dataset& dataset) {
    if (dataset.work_items.empty()) fail("EmptyDataset", "cannot build a feature matrix from zero work items");
    FeatureMatrix m;
    m.column_names = {"iteration", "time_taken", "priority",
                      "comment_count", "developer_count", "role_count"};
    m.row_ids.reserve(dataset.work_items.size());
    m.values.reserve(dataset.work_items.size());
    for (const auto& item : dataset.work_items) {
        m.row_ids.push_back(item.id);
        m.values.push_back({static_cast<double>(item.iteration), item.time_taken_days,
                            item.priority, static_cast<double>(item.comment_count),
                            static_cast<double>(item.developer_count),
                            static_cast<double>(item.role_count)});
    }
    return m;
}

FeatureMatrix zscore_normalize(const FeatureMatrix& matrix) {
    const std::size_t n = matrix.n_rows();
    if (n < 2) fail("TooFewRows", "z-scoring needs at least 2 rows, got " + std::to_string(n));
    const std::size_t d = matrix.n_cols();
    FeatureMatrix out = matrix;
    out.normalization.assign(d, {});
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += matrix.values[i][j];
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dlt = matrix.values[i][j] - mean;
            ss += dlt * dlt;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        ColumnStats& cs = out.normalization[j];
        cs.mean = mean;
        cs.sd = sd;
        cs.zero_variance = (sd == 0.0);
        for (std::size_t i = 0; i < n; ++i)
            out.values[i][j] = cs.zero_variance ? 0.0 : (matrix.values[i][j] - mean) / sd;
    }
    return out;
}

std::string to_json(const FeatureMatrix& m) {
    json j;
    j["row_ids"] = m.row_ids;
    j["column_names"] = m.column_names;
    j["values"] = m.values;
    if (m.normalized()) {
        json norm = json::array();
        for (const auto& cs : m.normalization)
            norm.push_back({{"mean", cs.mean}, {"sd", cs.sd}, {"zero_variance", cs.zero_variance}});
        j["normalization"] = std::move(norm);
    }
    return j.dump(2) + "\n";
}

FeatureMatrix feature_matrix_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail("SchemaError", "feature matrix: invalid JSON");
    FeatureMatrix m;
    try {
        m.row_ids = j.at("row_ids").get<std::vector<std::string>>();
        m.column_names = j.at("column_names").get<std::vector<std::string>>();
        m.values = j.at("values").get<std::vector<std::vector<double>>>();
        if (j.contains("normalization")) {
            for (const auto& rec : j["normalization"]) {
                ColumnStats cs;
                cs.mean = rec.at("mean").get<double>();
                cs.sd = rec.at("sd").get<double>();
                cs.zero_variance = rec.at("zero_variance").get<bool>();
                m.normalization.push_back(cs);
            }
        }
    } catch (const json::exception& e) {
        fail("SchemaError", std::string("feature matrix: ") + e.what());
    }
    for (const auto& row : m.values)
        if (row.size() != m.column_names.size())
            fail("SchemaError", "feature matrix: ragged rows");
    if (m.row_ids.size() != m.values.size())
        fail("SchemaError", "feature matrix: row_ids and values disagree");
    return m;
}

void save_feature_matrix(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("MissingFile", "cannot write " + path);
    out << to_json(m);
}

FeatureMatrix load_feature_matrix(const std::string& path) {
    return feature_matrix_from_json(read_whole_file(path));
}

std::string work_items_csv(const std::vector<WorkItem>& items) {
    std::string out = "id,kind,iteration,time_taken_days,priority,comment_count,developer_count,role_count\n";
    char buf[64];
    for (const auto& it : items) {
        out += csv::quote(it.id);
        out += ',';
        out += to_string(it.kind);
        out += ',';
        out += std::to_string(it.iteration);
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.4f", it.time_taken_days);
        out += buf;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.3f", it.priority);
        out += buf;
        out += ',';
        out += std::to_string(it.comment_count);
        out += ',';
        out += std::to_string(it.developer_count);
        out += ',';
        out += std::to_string(it.role_count);
        out += '\n';
    }
    return out;
}

std::string messages_csv(const std::vector<Message>& messages) {
    std::string out = "id,work_item_id,author_id,timestamp,text\n";
    for (const auto& m : messages) {
        out += csv::quote(m.id);
        out += ',';
        out += csv::quote(m.work_item_id);
        out += ',';
        out += csv::quote(m.author_id);
        out += ',';
        out += csv::quote(m.timestamp);
        out += ",\""; // text is always quoted, embedded quotes doubled
        for (char c : m.text) {
            if (c == '"') out += "\"\"";
            else out.push_back(c);
        }
        out += "\"\n";
    }
    return out;
}

} // namespace taskmap::model
