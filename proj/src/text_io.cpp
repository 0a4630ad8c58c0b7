#include "nlwave/text_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlwave/errors.hpp"

namespace nlwave {

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::string_view what)
{
    const std::string s = trim(text);
    if (s == "nan") {
        return std::nan("");
    }
    if (s == "inf") {
        return INFINITY;
    }
    if (s == "-inf") {
        return -INFINITY;
    }
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') {
        ++begin;
    }
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end || s.empty()) {
        throw ConfigError("cannot parse number for " + std::string(what) + ": '" + s + "'");
    }
    return value;
}

std::string trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(text.substr(start)));
            break;
        }
        out.push_back(trim(text.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IOError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IOError("cannot open " + path.string() + " for writing");
    }
    out << contents;
    if (!out) {
        throw IOError("write failed for " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IOError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string CsvTable::to_string() const
{
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += (i ? "," : "") + header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out += ',';
            }
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw IOError("CSV has no column '" + std::string(name) + "'");
}

CsvTable CsvTable::parse(const std::string& text)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split(line, ',');
        if (first) {
            table.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw IOError("CSV row width does not match header");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(parse_double(c, "CSV cell"));
            } catch (const ConfigError& e) {
                throw IOError(e.what());
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (first) {
        throw IOError("empty CSV");
    }
    return table;
}

} // namespace nlwave
