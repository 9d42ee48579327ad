#pragma once

#include <string>
#include <vector>

namespace taskmap::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// RFC-4180 style: fields separated by commas, quoted with '"' when they
// contain commas, quotes or newlines; embedded quotes doubled.
Table read_file(const std::string& path);
Table read_text(const std::string& text);

std::string quote(const std::string& field);
std::string join_row(const std::vector<std::string>& fields);

} // namespace taskmap::csv
