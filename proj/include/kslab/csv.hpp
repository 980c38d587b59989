#ifndef KSLAB_CSV_HPP
#define KSLAB_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

namespace kslab {

/// Minimal CSV writer: header row, '.' decimal separator independent of
/// locale, numbers at 17 significant digits for bit-faithful round trips.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& cells);

    static std::string num(double v);

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

} // namespace kslab

#endif
