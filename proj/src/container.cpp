#include "annzip/container.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "annzip/bytes.hpp"
#include "annzip/errors.hpp"

namespace annzip {

namespace {

constexpr char kMagic[5] = "IVQZ";
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kEntryBytes = 4 + 8 + 8;

}  // namespace

Container::Tag Container::tag(std::string_view s) {
  if (s.size() != 4) throw DomainError("section tags are 4 characters");
  return {s[0], s[1], s[2], s[3]};
}

void Container::add(Tag t, std::vector<std::uint8_t> bytes) {
  if (has(t)) throw LogicError("duplicate container section");
  sections_.emplace_back(t, std::move(bytes));
}

bool Container::has(Tag t) const {
  for (const auto& s : sections_)
    if (s.first == t) return true;
  return false;
}

std::span<const std::uint8_t> Container::get(Tag t) const {
  for (const auto& s : sections_)
    if (s.first == t) return s.second;
  throw FormatError("missing container section " + std::string(t.data(), 4));
}

std::vector<std::uint8_t> Container::to_bytes() const {
  ByteWriter out;
  out.put_tag(kMagic);
  out.put_u8(kVersion);
  out.put_u32(static_cast<std::uint32_t>(sections_.size()));
  std::uint64_t offset = 4 + 1 + 4 + kEntryBytes * sections_.size();
  for (const auto& [t, bytes] : sections_) {
    out.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(t.data()), 4));
    out.put_u64(offset);
    out.put_u64(bytes.size());
    offset += bytes.size();
  }
  for (const auto& s : sections_) out.put_bytes(s.second);
  return out.take();
}

Container Container::from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 9 || !in.get_tag(kMagic)) throw FormatError("not an IVQZ container");
  if (in.get_u8() != kVersion) throw FormatError("unsupported container version");
  const std::uint32_t count = in.get_u32();
  if (count > in.remaining() / kEntryBytes) throw FormatError("container section table truncated");
  Container c;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tag t;
    const auto raw = in.get_bytes(4);
    std::memcpy(t.data(), raw.data(), 4);
    const std::uint64_t offset = in.get_u64();
    const std::uint64_t size = in.get_u64();
    if (offset > bytes.size() || size > bytes.size() - offset) throw FormatError("container section out of bounds");
    c.add(t, std::vector<std::uint8_t>(bytes.begin() + offset, bytes.begin() + offset + size));
  }
  return c;
}

void Container::write_file(const std::string& path) const { write_file_bytes(path, to_bytes()); }

Container Container::read_file(const std::string& path) { return from_bytes(read_file_bytes(path)); }

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("write failed for " + path);
}

}  // namespace annzip
