#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dceval/classfile.hpp"

namespace dceval::classfile::detail {

// Big-endian cursor over a byte span; `base` shifts reported offsets so that
// errors inside nested structures still point into the whole file.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data, std::size_t base = 0)
      : data_(data), base_(base) {}

  std::size_t pos() const noexcept { return pos_; }
  std::size_t file_offset() const noexcept { return base_ + pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }
  void seek(std::size_t p) { pos_ = p; }

  void need(std::size_t n) const {
    if (remaining() < n)
      throw ClassFileError(ErrorKind::Truncated, base_ + data_.size(),
                           "input ends while " + std::to_string(n) + " more byte(s) are required");
  }
  std::uint8_t u1() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u2() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u4() {
    need(4);
    std::uint32_t v = (std::uint32_t{data_[pos_]} << 24) | (std::uint32_t{data_[pos_ + 1]} << 16) |
                      (std::uint32_t{data_[pos_ + 2]} << 8) | std::uint32_t{data_[pos_ + 3]};
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  std::vector<std::uint8_t> out;

  void u1(std::uint32_t v) { out.push_back(static_cast<std::uint8_t>(v)); }
  void u2(std::uint32_t v) {
    u1(v >> 8);
    u1(v);
  }
  void u4(std::uint32_t v) {
    u2(v >> 16);
    u2(v);
  }
  void bytes(std::span<const std::uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
};

inline std::uint16_t get_u2(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}
inline void put_u2(std::span<std::uint8_t> b, std::size_t at, std::uint16_t v) {
  b[at] = static_cast<std::uint8_t>(v >> 8);
  b[at + 1] = static_cast<std::uint8_t>(v);
}

}  // namespace dceval::classfile::detail
