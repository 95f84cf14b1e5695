#pragma once

// RFC 4180 writer: CRLF records, quoting only where needed, reals printed
// with 17 significant digits so every value round-trips.

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace fso::cli {

class CsvWriter {
public:
    class Row {
    public:
        explicit Row(CsvWriter& w) : w_(w) {}
        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;
        ~Row() { w_.out_ += "\r\n"; }

        Row& operator<<(double v) { return field(format_real(v)); }
        Row& operator<<(int v) { return field(std::to_string(v)); }
        Row& operator<<(long long v) { return field(std::to_string(v)); }
        Row& operator<<(unsigned long v) { return field(std::to_string(v)); }
        Row& operator<<(unsigned long long v) { return field(std::to_string(v)); }
        Row& operator<<(bool v) { return field(v ? "1" : "0"); }
        Row& operator<<(const char* v) { return field(quote(v)); }
        Row& operator<<(const std::string& v) { return field(quote(v)); }

    private:
        Row& field(const std::string& s) {
            if (!first_) w_.out_ += ',';
            first_ = false;
            w_.out_ += s;
            return *this;
        }

        CsvWriter& w_;
        bool first_ = true;
    };

    explicit CsvWriter(const std::vector<std::string>& header) {
        Row r(*this);
        for (const auto& h : header) r << h;
    }

    Row row() { return Row(*this); }

    const std::string& str() const noexcept { return out_; }

    static std::string format_real(double v) {
        if (std::isnan(v)) return "nan";
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    static std::string quote(std::string_view s) {
        if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        q += '"';
        return q;
    }

private:
    std::string out_;
};

/// Splits RFC 4180 text into records of fields.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace fso::cli
