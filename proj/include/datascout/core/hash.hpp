// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>

#include "datascout/core/error.hpp"

namespace datascout::hashing {

inline std::string to_hex(const unsigned char* data, std::size_t size) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0x0f]);
  }
  return out;
}

namespace detail {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

class Digest {
 public:
  explicit Digest(const EVP_MD* md) : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), md, nullptr) != 1) {
      fail(ErrorCode::kIoFailure, "digest initialisation failed");
    }
  }

  void update(std::string_view bytes) {
    EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size());
  }

  std::string hex() {
    unsigned char buf[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), buf, &len);
    return to_hex(buf, len);
  }

 private:
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx_;
};

inline const EVP_MD* algorithm(std::string_view name) {
  if (name == "sha256") return EVP_sha256();
  if (name == "md5") return EVP_md5();
  if (name == "sha1") return EVP_sha1();
  if (name == "sha512") return EVP_sha512();
  return nullptr;
}

}  // namespace detail

inline std::string sha256_hex(std::string_view bytes) {
  detail::Digest d(EVP_sha256());
  d.update(bytes);
  return d.hex();
}

inline std::string file_digest_hex(const std::filesystem::path& path, std::string_view algo) {
  const EVP_MD* md = detail::algorithm(algo);
  require(md != nullptr, ErrorCode::kInvalidArgument, "unknown digest " + std::string(algo));
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kFileMissing, path.string());
  detail::Digest d(md);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return d.hex();
}

/// Verifies a repository checksum string of the form "algo:hex" (bare hex is md5).
inline bool checksum_matches(const std::filesystem::path& path, std::string_view checksum) {
  std::string_view algo = "md5";
  std::string_view expected = checksum;
  if (auto colon = checksum.find(':'); colon != std::string_view::npos) {
    algo = checksum.substr(0, colon);
    expected = checksum.substr(colon + 1);
  }
  std::string want(expected);
  for (auto& c : want) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return file_digest_hex(path, algo) == want;
}

/// 64-bit FNV-1a with a seed folded into the offset basis. Stable across platforms.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // final avalanche so that low bits are usable as bucket indices
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace datascout::hashing
