#include "kslab/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace kslab {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    if (ec != std::errc()) throw std::runtime_error("CsvWriter: number format");
    return std::string(buf, ptr);
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::invalid_argument("CsvWriter: column count");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << num(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: column count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

} // namespace kslab
