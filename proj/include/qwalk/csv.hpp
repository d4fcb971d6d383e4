#pragma once

#include <string>
#include <vector>

namespace qwalk {

/// Fixed 15-significant-digit rendering; NaN prints as "nan".
std::string format_number(double x);

/// Writes header plus rows, creating parent directories. Throws std::runtime_error on I/O failure.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text(const std::string& path, const std::string& text);

}  // namespace qwalk
