// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace tdlchan::csv {

/// Numeric formatting shared by every emitted table: '.' decimal separator,
/// scientific notation for 0 < |x| < 1e-3, locale-independent.
std::string format_number(double v);

/// RFC-4180 quoting (only when the field needs it).
std::string escape_field(const std::string &field);

/// Writes header + rows + a trailing comment line. Rows are pre-formatted
/// fields; the footer records provenance (config hash, seed).
void write_table(const std::string &path, const std::vector<std::string> &header,
                 const std::vector<std::vector<std::string>> &rows,
                 const std::string &footer_comment);

} // namespace tdlchan::csv
