#include "tep/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tep/errors.hpp"

namespace tep::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.emplace_back(trim(cur));
    return out;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

Table Table::parse(std::string_view text, std::string name) {
    Table t;
    t.name_ = std::move(name);
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF) text.remove_prefix(3);  // BOM
    std::size_t line_no = 0;
    bool have_header = false;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) {
            if (!have_header) throw ParseError(t.name_, line_no, 0, "missing header row");
            continue;
        }
        auto fields = split_line(line);
        if (!have_header) {
            t.header_ = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header_.size())
            throw ParseError(t.name_, line_no, 0,
                             "expected " + std::to_string(t.header_.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        t.rows_.push_back(std::move(fields));
    }
    if (!have_header) throw ParseError(t.name_, 1, 0, "empty file");
    return t;
}

std::optional<std::size_t> Table::find_column(std::string_view column) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == column) return i;
    return std::nullopt;
}

std::size_t Table::column(std::string_view column) const {
    auto c = find_column(column);
    if (!c) throw ParseError(name_, 1, 0, "missing column '" + std::string(column) + "'");
    return *c;
}

const std::string& Table::cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

void Table::fail(std::size_t row, std::size_t col, const std::string& what) const {
    throw ParseError(name_, line_of(row), col + 1, what);
}

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    if (s == "inf" || s == "+inf" || s == "Inf") return HUGE_VAL;
    if (s == "-inf" || s == "-Inf") return -HUGE_VAL;
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        fail(row, col, "expected a number in column '" + header_[col] + "', got '" + s + "'");
    return v;
}

long long Table::integer(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        fail(row, col, "expected an integer in column '" + header_[col] + "', got '" + s + "'");
    return v;
}

bool Table::flag(std::size_t row, std::size_t col) const {
    const std::string& s = cell(row, col);
    if (s == "1") return true;
    if (s == "0") return false;
    fail(row, col, "expected 0 or 1 in column '" + header_[col] + "', got '" + s + "'");
}

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Writer& Writer::header(std::initializer_list<std::string_view> columns) {
    for (auto c : columns) field(c);
    end_row();
    return *this;
}

void Writer::separator() {
    if (row_started_) out_ << ',';
    row_started_ = true;
}

Writer& Writer::field(std::string_view text) {
    separator();
    if (text.find_first_of(",\"\n") != std::string_view::npos) {
        out_ << '"';
        for (char c : text) {
            if (c == '"') out_ << '"';
            out_ << c;
        }
        out_ << '"';
    } else {
        out_ << text;
    }
    return *this;
}

Writer& Writer::field(double value) {
    separator();
    out_ << format_number(value);
    return *this;
}

Writer& Writer::field(long long value) {
    separator();
    out_ << value;
    return *this;
}

Writer& Writer::empty_field() {
    separator();
    return *this;
}

void Writer::end_row() {
    out_ << '\n';
    row_started_ = false;
}

}  // namespace tep::csv
