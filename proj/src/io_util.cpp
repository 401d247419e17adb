#include "hyla/io_util.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hyla/errors.hpp"

namespace hyla {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

bool parse_index(std::string_view text, std::int64_t& out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ValidationError("write failed for " + path.string());
}

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw IngestError("checkpoint truncated");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

}  // namespace hyla
