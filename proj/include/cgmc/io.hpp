#pragma once

#include <string>
#include <vector>

#include "cgmc/fields.hpp"

namespace cgmc {

// Field dump: a short text header (dimension, n, length, schedule, kernel,
// seed) followed by one row-major little-endian f64 block per level.
void write_field_dump(const std::string& path, const FieldHierarchy& field);
FieldHierarchy read_field_dump(const std::string& path);

// CSV export for small grids (d = 1: x,level0,...; d = 2: x1,x2,level0,...)
void write_field_csv(const std::string& path, const FieldHierarchy& field);

// Deterministic CSV writer: %.17g floats, '\n' endings, atomic rename on close.
class CsvWriter {
  public:
    explicit CsvWriter(std::string path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);
    void close();

    static std::string format(double v);

  private:
    std::string path_;
    std::string tmp_path_;
    std::string buffer_;
    bool closed_ = false;
};

void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace cgmc
