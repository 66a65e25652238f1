#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace mevo {

// Streaming SHA-256, used for content hashes in run manifests.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, std::size_t len);
  // Finalizes a copy of the state, so update() may continue afterwards.
  std::string hex() const;

 private:
  void compress(const unsigned char* chunk);

  std::uint32_t h_[8];
  std::uint64_t total_ = 0;
  unsigned char buf_[64];
  std::size_t fill_ = 0;
};

std::string sha256_hex(std::string_view data);
// Throws FormatError if the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace mevo
