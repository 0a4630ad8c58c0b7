#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlwave {

/// Shortest representation that round-trips to the same double.
[[nodiscard]] std::string format_double(double value);

/// Parses a double, throwing ConfigError with `what` in the message on failure.
[[nodiscard]] double parse_double(std::string_view text, std::string_view what);

[[nodiscard]] std::string trim(std::string_view text);
[[nodiscard]] std::vector<std::string> split(std::string_view text, char sep);

/// Throws IOError.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

/// Simple CSV table with a header row; all cells numeric.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::size_t column(std::string_view name) const; ///< throws IOError
    static CsvTable parse(const std::string& text);                 ///< throws IOError
};

} // namespace nlwave
