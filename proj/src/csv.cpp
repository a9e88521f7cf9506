#include "lrmf/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lrmf {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        data_error("cannot parse number '" + std::string(text) + "'");
    }
    return value;
}

std::string matrix_to_csv(const Matrix& m) {
    std::string out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            out += format_double(m(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

Matrix matrix_from_csv(std::string_view text, bool skip_header) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    bool header_pending = skip_header;
    while (!text.empty()) {
        const auto end = text.find('\n');
        std::string_view line = text.substr(0, end);
        text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (header_pending) {
            header_pending = false;
            continue;
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            try {
                row.push_back(parse_double(line.substr(start, comma - start)));
            } catch (const Error& e) {
                data_error("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            data_error("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) data_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) data_error("cannot write " + path.string());
    out << text;
    if (!out) data_error("failed writing " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) { write_text_file(path, matrix_to_csv(m)); }

Matrix read_matrix_csv(const std::filesystem::path& path, bool skip_header) {
    return matrix_from_csv(read_text_file(path), skip_header);
}

}  // namespace lrmf
