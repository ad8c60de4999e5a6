#pragma once

// Sectioned index file: magic "IVQZ", version byte, u32 section count, a
// table of (4-byte tag, u64 offset, u64 size) entries, then the section bytes.
// Offsets are absolute from the start of the file; all integers little-endian.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace annzip {

class Container {
 public:
  using Tag = std::array<char, 4>;

  static Tag tag(std::string_view s);

  void add(Tag tag, std::vector<std::uint8_t> bytes);
  bool has(Tag tag) const;
  /// Throws FormatError when the section is missing.
  std::span<const std::uint8_t> get(Tag tag) const;
  const std::vector<std::pair<Tag, std::vector<std::uint8_t>>>& sections() const { return sections_; }

  std::vector<std::uint8_t> to_bytes() const;
  static Container from_bytes(std::span<const std::uint8_t> bytes);

  void write_file(const std::string& path) const;
  static Container read_file(const std::string& path);

 private:
  std::vector<std::pair<Tag, std::vector<std::uint8_t>>> sections_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace annzip
