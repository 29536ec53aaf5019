#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "hypokg/common/error.hpp"

namespace hypokg::binary {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

/// Bounds-checked little-endian reader; throws FormatError on truncation.
class Reader {
 public:
  Reader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}
  bool at_end() const { return pos_ >= data_.size(); }

  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw FormatError(what_ + " is truncated");
  }
  std::string data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace hypokg::binary
