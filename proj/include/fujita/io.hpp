#pragma once
// Artifact writing: CSV tables (comma-separated, '.' decimal, mandatory
// header, LF line endings) and atomic file writes (temp-then-rename, so no
// output file is ever observed partially written).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fujita {

// ============================================================================
// CSV
// ============================================================================

/// Canonical cell rendering for a double: shortest round-trippable decimal
/// with '.' as the separator (printf "%.*g" is locale-independent for g
/// conversions of finite values in the C locale the tools run under).
inline std::string csv_number(double x, int precision = 17) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    return buf;
}

/// Row-by-row CSV assembly with a fixed column count.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
        if (header.empty()) throw std::invalid_argument("CsvWriter: header row is mandatory");
        append_row(header);
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw std::invalid_argument("CsvWriter: expected " + std::to_string(columns_) +
                                        " cells, got " + std::to_string(cells.size()));
        append_row(cells);
    }

    const std::string& str() const { return text_; }

private:
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].find_first_of(",\n\r\"") != std::string::npos)
                throw std::invalid_argument("CsvWriter: cell needs quoting, which this "
                                            "numeric dialect does not use: " + cells[c]);
            if (c) text_ += ',';
            text_ += cells[c];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

// ============================================================================
// Atomic writes
// ============================================================================

/// Write content to a sibling temp file, then rename over the target.  The
/// rename is atomic on POSIX filesystems, so readers see either the old file
/// or the complete new one.
inline void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());

    static thread_local std::mt19937_64 rng{std::random_device{}()};
    fs::path tmp = path;
    tmp += ".tmp-" + std::to_string(rng());

    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write_file: cannot open " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("atomic_write_file: short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw std::runtime_error("atomic_write_file: rename to " + path.string() +
                                 " failed: " + ec.message());
    }
}

/// Read a whole file (test and round-trip helper).
inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fujita
