#include "cgmc/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cgmc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field dumps are little-endian; byte swapping is not implemented");

void write_block(std::ofstream& out, const std::vector<double>& values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

}  // namespace

void write_field_dump(const std::string& path, const FieldHierarchy& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open field dump for writing: " + path);
    out << "cgmc-field 1\n";
    out << "dimension " << field.grid.dimension << "\n";
    out << "n " << field.grid.n << "\n";
    out << "length " << CsvWriter::format(field.grid.length) << "\n";
    out << "kernel " << field.kernel_name << "\n";
    out << "seed " << field.seed << "\n";
    out << "replica " << field.replica << "\n";
    out << "field_tag " << field.field_tag << "\n";
    out << "levels " << field.n_levels() << "\n";
    out << "schedule";
    for (double e : field.schedule.levels) out << " " << CsvWriter::format(e);
    out << "\nend-header\n";
    for (const auto& level : field.levels) write_block(out, level);
    if (!out) throw std::runtime_error("failed writing field dump: " + path);
}

FieldHierarchy read_field_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open field dump: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "cgmc-field" || version != 1)
        throw std::runtime_error("not a cgmc field dump: " + path);
    FieldHierarchy f;
    std::size_t n_levels = 0;
    std::string key;
    while (in >> key && key != "end-header") {
        if (key == "dimension") in >> f.grid.dimension;
        else if (key == "n") in >> f.grid.n;
        else if (key == "length") in >> f.grid.length;
        else if (key == "kernel") in >> f.kernel_name;
        else if (key == "seed") in >> f.seed;
        else if (key == "replica") in >> f.replica;
        else if (key == "field_tag") in >> f.field_tag;
        else if (key == "levels") in >> n_levels;
        else if (key == "schedule") {
            // the writer emits the level count before the schedule line
            f.schedule.levels.assign(n_levels, 0.0);
            for (auto& e : f.schedule.levels)
                if (!(in >> e)) throw std::runtime_error("truncated schedule in " + path);
        } else {
            throw std::runtime_error("unknown field dump key: " + key);
        }
    }
    in.get();  // newline after end-header
    const std::size_t pts = f.grid.total_points();
    f.levels.resize(n_levels);
    for (auto& level : f.levels) {
        level.resize(pts);
        in.read(reinterpret_cast<char*>(level.data()),
                static_cast<std::streamsize>(pts * sizeof(double)));
        if (!in) throw std::runtime_error("truncated field dump: " + path);
    }
    for (std::size_t j = 0; j < f.schedule.levels.size(); ++j)
        f.level_variance.push_back(std::log(1.0 / f.schedule.levels[j]));
    return f;
}

void write_field_csv(const std::string& path, const FieldHierarchy& field) {
    CsvWriter csv(path);
    std::vector<std::string> names;
    if (field.grid.dimension == 1) {
        names.push_back("x");
    } else {
        names.push_back("x1");
        names.push_back("x2");
    }
    for (std::size_t j = 0; j < field.n_levels(); ++j)
        names.push_back("level_" + std::to_string(j));
    csv.header(names);
    const std::size_t n = field.grid.n;
    if (field.grid.dimension == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::string> cells{CsvWriter::format(field.grid.coord(i))};
            for (const auto& level : field.levels) cells.push_back(CsvWriter::format(level[i]));
            csv.row(cells);
        }
    } else {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                std::vector<std::string> cells{CsvWriter::format(field.grid.coord(a)),
                                               CsvWriter::format(field.grid.coord(b))};
                for (const auto& level : field.levels)
                    cells.push_back(CsvWriter::format(level[a * n + b]));
                csv.row(cells);
            }
    }
    csv.close();
}

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)), tmp_path_(path_ + ".tmp") {}

CsvWriter::~CsvWriter() {
    if (!closed_) {
        try {
            close();
        } catch (...) {
        }
    }
}

std::string CsvWriter::format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void CsvWriter::header(const std::vector<std::string>& names) { row(names); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    write_file_atomic(path_, buffer_);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << contents;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("atomic rename failed: " + path);
}

}  // namespace cgmc
