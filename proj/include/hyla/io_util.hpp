#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hyla {

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// Strict parsers; return false on trailing garbage or overflow.
bool parse_double(std::string_view text, double& out);
bool parse_index(std::string_view text, std::int64_t& out);

std::vector<std::string_view> split_tabs(std::string_view line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Little-endian binary primitives used by the checkpoint format.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

}  // namespace hyla
