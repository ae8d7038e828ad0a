#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tep::csv {

/// In-memory CSV file with a header row. Row numbers reported in errors are
/// file line numbers (the header is line 1).
class Table {
public:
    static Table read(const std::filesystem::path& path);
    static Table parse(std::string_view text, std::string name);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }

    std::optional<std::size_t> find_column(std::string_view column) const;
    std::size_t column(std::string_view column) const;  // throws ParseError if absent

    const std::string& cell(std::size_t row, std::size_t col) const;
    double number(std::size_t row, std::size_t col) const;
    long long integer(std::size_t row, std::size_t col) const;
    bool flag(std::size_t row, std::size_t col) const;  // 0/1

    /// File line number of a data row.
    std::size_t line_of(std::size_t row) const { return row + 2; }

    [[noreturn]] void fail(std::size_t row, std::size_t col, const std::string& what) const;

private:
    std::string name_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_number(double value);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& header(std::initializer_list<std::string_view> columns);
    Writer& field(std::string_view text);
    Writer& field(double value);
    Writer& field(long long value);
    Writer& field(std::size_t value) { return field(static_cast<long long>(value)); }
    Writer& field(int value) { return field(static_cast<long long>(value)); }
    Writer& empty_field();
    void end_row();

private:
    void separator();

    std::ostream& out_;
    bool row_started_ = false;
};

}  // namespace tep::csv
