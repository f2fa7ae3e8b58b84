#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hea {

struct CsvParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// In-memory comma-separated table: one header row, numeric body.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        size_t a = field.find_first_not_of(" \t\r");
        size_t b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvParseError("cannot open CSV file: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (first) {
            table.header = fields;
            first = false;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            try {
                row.push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : std::stod(f));
            } catch (const std::exception&) {
                throw CsvParseError(path + ":" + std::to_string(lineno) +
                                    ": not a number: '" + f + "'");
            }
        }
        if (row.size() != table.header.size())
            throw CsvParseError(path + ":" + std::to_string(lineno) +
                                ": column count mismatch");
        table.rows.push_back(std::move(row));
    }
    if (first) throw CsvParseError(path + ": missing header row");
    return table;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        out_.precision(12);
    }

    void header(const std::vector<std::string>& names) { write_fields(names); }

    void row(const std::vector<double>& values) {
        bool sep = false;
        for (double v : values) {
            if (sep) out_ << ',';
            out_ << v;
            sep = true;
        }
        out_ << '\n';
    }

private:
    void write_fields(const std::vector<std::string>& fields) {
        bool sep = false;
        for (const auto& f : fields) {
            if (sep) out_ << ',';
            out_ << f;
            sep = true;
        }
        out_ << '\n';
    }

    std::ofstream out_;
};

}  // namespace hea
