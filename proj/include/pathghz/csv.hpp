// Deterministic CSV emission: digest comment line, header row, %.12g numbers.
#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pathghz/errors.hpp"

namespace pathghz {

inline std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvWriter {
   public:
    CsvWriter(const std::filesystem::path& path, std::uint64_t digest,
              std::vector<std::string> columns)
        : out_(path, std::ios::trunc), columns_(std::move(columns)) {
        if (!out_) throw validation_error("cannot write output file: " + path.string());
        char digest_hex[32];
        std::snprintf(digest_hex, sizeof(digest_hex), "%016" PRIx64, digest);
        out_ << "# config_digest=" << digest_hex << "\n";
    }

    // Comments land between the digest and the header row.
    void comment(const std::string& text) {
        if (header_written_) throw validation_error("csv comments must precede the data rows");
        out_ << "# " << text << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        flush_header();
        write_cells(cells);
    }

    ~CsvWriter() { flush_header(); }

   private:
    void flush_header() {
        if (header_written_) return;
        header_written_ = true;
        write_cells(columns_);
    }

    void write_cells(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

    std::ofstream out_;
    std::vector<std::string> columns_;
    bool header_written_ = false;
};

}  // namespace pathghz
