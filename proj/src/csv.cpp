// SPDX-License-Identifier: Apache-2.0
#include "tdlchan/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tdlchan::csv {

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0";
    char buf[48];
    if (std::abs(v) < 1e-3)
        std::snprintf(buf, sizeof(buf), "%.12e", v);
    else
        std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string escape_field(const std::string &field) {
    const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_table(const std::string &path, const std::vector<std::string> &header,
                 const std::vector<std::vector<std::string>> &rows,
                 const std::string &footer_comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_table: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << escape_field(header[i]);
    out << "\n";
    for (const auto &row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << escape_field(row[i]);
        out << "\n";
    }
    if (!footer_comment.empty())
        out << "# " << footer_comment << "\n";
}

} // namespace tdlchan::csv
