#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lrq {

/// Shortest round-trip decimal form of a double (<= 17 significant digits,
/// locale-independent). This is what keeps repeated runs byte-identical.
inline std::string format_double(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

/// Minimal deterministic CSV emitter: '\n' line endings, no quoting (all
/// payloads here are numeric or plain identifiers).
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, std::initializer_list<std::string_view> header)
        : out_(file, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot open " + file.string() + " for writing");
        bool first = true;
        for (const auto h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    CsvWriter& field(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvWriter& field(int v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(std::string_view v) {
        sep();
        out_ << v;
        return *this;
    }
    void endrow() {
        out_ << '\n';
        at_row_start_ = true;
    }

    void row(std::initializer_list<double> values) {
        for (const double v : values) field(v);
        endrow();
    }

private:
    void sep() {
        if (!at_row_start_) out_ << ',';
        at_row_start_ = false;
    }

    std::ofstream out_;
    bool at_row_start_ = true;
};

} // namespace lrq
