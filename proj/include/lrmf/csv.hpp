#pragma once

#include "lrmf/common.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lrmf {

/// Shortest decimal string that parses back to the same double.
[[nodiscard]] std::string format_double(double value);
[[nodiscard]] double parse_double(std::string_view text);

/// Comma-separated rows, '.' decimal point, no header.
[[nodiscard]] std::string matrix_to_csv(const Matrix& m);
[[nodiscard]] Matrix matrix_from_csv(std::string_view text, bool skip_header = false);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
[[nodiscard]] Matrix read_matrix_csv(const std::filesystem::path& path, bool skip_header = false);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lrmf
