#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace thumper {

/// Raised for malformed input files: bad rows, bad numbers, unknown keys.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file that could not be opened, read or written.
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration key that is not recognized or has an unusable value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char delimiter);
std::string trim(std::string_view text);

std::uint64_t fnv1a(std::string_view text) noexcept;

/// Flat `key = value` text; `#` starts a comment. Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace thumper
