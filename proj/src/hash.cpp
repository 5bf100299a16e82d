#include "hash.hpp"

#include <openssl/evp.h>

#include "errors.hpp"

namespace cgmkit {

Sha256 sha256(std::string_view bytes) {
  Sha256 out{};
  unsigned int len = 0;
  int ok = EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr);
  require(ok == 1 && len == out.size(), ErrorKind::io, "sha256 digest failed");
  return out;
}

std::string to_hex(const Sha256& digest) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : digest) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 0xf]);
  }
  return s;
}

}  // namespace cgmkit
