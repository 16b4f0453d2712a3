#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rydsim/scenario.hpp"

namespace ryd {

// 17 significant digits round-trip a double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw IoError("cannot open for writing: " + path);
        write_row_strings(header);
    }

    void write_row(const std::vector<double>& values) {
        std::string line;
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format_double(values[i]);
        }
        out_ << line << '\n';
        if (!out_) throw IoError("write failed");
    }

    void write_row_strings(const std::vector<std::string>& cells) {
        std::string line;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        out_ << line << '\n';
        if (!out_) throw IoError("write failed");
    }

  private:
    std::ofstream out_;
};

}  // namespace ryd
