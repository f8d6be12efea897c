// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ingest/file_entry.hpp"

namespace datascout::ingest {

struct TextDocument {
  std::string doc_id;
  std::filesystem::path source_path;
  std::string body;
  std::size_t token_count = 0;
};

/// Pluggable text extraction backend. Implementations throw
/// kExtractionFailure when the file cannot be turned into text.
class TextExtractor {
 public:
  virtual ~TextExtractor() = default;
  virtual std::string extract(const std::filesystem::path& path) const = 0;
};

/// Returns the file's bytes, which must be valid UTF-8.
class PassThroughExtractor final : public TextExtractor {
 public:
  std::string extract(const std::filesystem::path& path) const override {
    std::string body = fs::read_file(path);
    require(text::valid_utf8(body), ErrorCode::kExtractionFailure, path.string() + " is not UTF-8 text");
    return body;
  }
};

namespace pdf {

inline std::string inflate(std::string_view compressed) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail(ErrorCode::kExtractionFailure, "zlib init failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  char buf[16384];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = ::inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail(ErrorCode::kExtractionFailure, "corrupt flate stream");
    }
    out.append(buf, sizeof(buf) - zs.avail_out);
  } while (rc != Z_STREAM_END && zs.avail_in > 0);
  inflateEnd(&zs);
  return out;
}

/// ASCII base-85 with 'z' for four zero bytes, terminated by "~>".
inline std::string ascii85_decode(std::string_view in) {
  std::string out;
  std::uint32_t group = 0;
  int count = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (c == '~') break;
    if (text::is_space_byte(static_cast<unsigned char>(c))) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    require(c >= '!' && c <= 'u', ErrorCode::kExtractionFailure, "bad ASCII85 byte");
    group = group * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((group >> s) & 0xff));
      group = 0;
      count = 0;
    }
  }
  require(count != 1, ErrorCode::kExtractionFailure, "truncated ASCII85 group");
  if (count > 0) {
    for (int k = count; k < 5; ++k) group = group * 85 + 84;
    for (int b = 0; b < count - 1; ++b) out.push_back(static_cast<char>((group >> (24 - 8 * b)) & 0xff));
  }
  return out;
}

inline std::string ascii_hex_decode(std::string_view in) {
  std::string out;
  int high = -1;
  for (char c : in) {
    if (c == '>') break;
    if (text::is_space_byte(static_cast<unsigned char>(c))) continue;
    int v = 0;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else fail(ErrorCode::kExtractionFailure, "bad ASCIIHex byte");
    if (high < 0) {
      high = v;
    } else {
      out.push_back(static_cast<char>(high * 16 + v));
      high = -1;
    }
  }
  if (high >= 0) out.push_back(static_cast<char>(high * 16));
  return out;
}

/// Applies the stream filters named in a stream dictionary, in order.
inline std::string decode_stream(std::string_view dict, std::string_view raw) {
  std::vector<std::pair<std::size_t, std::string_view>> filters;
  for (std::string_view name : {"/ASCII85Decode", "/ASCIIHexDecode", "/FlateDecode"}) {
    for (auto at = dict.find(name); at != std::string_view::npos; at = dict.find(name, at + 1)) filters.push_back({at, name});
  }
  std::sort(filters.begin(), filters.end());
  std::string data(raw);
  for (const auto& [at, name] : filters) {
    if (name == "/ASCII85Decode") data = ascii85_decode(data);
    else if (name == "/ASCIIHexDecode") data = ascii_hex_decode(data);
    else data = inflate(data);
  }
  return data;
}

/// Decodes a literal string starting just after '('; advances `i` past ')'.
inline std::string literal_string(std::string_view s, std::size_t& i) {
  std::string out;
  int depth = 1;
  while (i < s.size()) {
    char c = s[i++];
    if (c == '\\' && i < s.size()) {
      char e = s[i++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '\r':
          if (i < s.size() && s[i] == '\n') ++i;
          break;
        case '\n': break;
        default:
          if (e >= '0' && e <= '7') {
            int v = e - '0';
            for (int k = 0; k < 2 && i < s.size() && s[i] >= '0' && s[i] <= '7'; ++k) v = v * 8 + (s[i++] - '0');
            out.push_back(static_cast<char>(v));
          } else {
            out.push_back(e);
          }
      }
    } else if (c == '(') {
      ++depth;
      out.push_back(c);
    } else if (c == ')') {
      if (--depth == 0) break;
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline std::string hex_string(std::string_view s, std::size_t& i) {
  std::string digits;
  while (i < s.size() && s[i] != '>') {
    if (std::isxdigit(static_cast<unsigned char>(s[i]))) digits.push_back(s[i]);
    ++i;
  }
  ++i;
  if (digits.size() % 2) digits.push_back('0');
  std::string out;
  for (std::size_t k = 0; k < digits.size(); k += 2) {
    out.push_back(static_cast<char>(std::stoi(digits.substr(k, 2), nullptr, 16)));
  }
  return out;
}

/// Latin-1 bytes to UTF-8, so single-byte font encodings come out readable.
inline std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

/// Text-showing operators of one content stream: Tj, ', ", TJ; positioning
/// operators that move to a new line emit a line break.
inline std::string content_text(std::string_view s) {
  std::string out;
  std::string pending;
  bool in_array = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '(') {
      ++i;
      pending += literal_string(s, i);
    } else if (c == '<' && i + 1 < s.size() && s[i + 1] != '<') {
      ++i;
      pending += hex_string(s, i);
    } else if (c == '[') {
      in_array = true;
      ++i;
    } else if (c == ']') {
      in_array = false;
      ++i;
    } else if (in_array && (c == '-' || std::isdigit(static_cast<unsigned char>(c)))) {
      std::size_t j = i + 1;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      double kern = 0;
      text::parse_double(s.substr(i, j - i), kern);
      if (kern < -200) pending.push_back(' ');
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '*') {
      std::size_t j = i;
      while (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) || s[j] == '*' || s[j] == '\'' ||
                              s[j] == '"')) {
        ++j;
      }
      const auto op = s.substr(i, j - i);
      if (op == "Tj" || op == "TJ" || op == "'" || op == "\"") {
        if (op == "'" || op == "\"") out.push_back('\n');
        out += pending;
      } else if (op == "T*" || op == "Td" || op == "TD") {
        out.push_back('\n');
      } else if (op == "ET") {
        out.push_back('\n');
      }
      pending.clear();
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace pdf

/// Minimal PDF backend: walks every content stream (raw, Flate, ASCII85 or ASCIIHex
/// encoded) and collects the text-showing operators. Good enough for PDFs with simple
/// single-byte fonts; anything else should plug in a dedicated extractor.
class BasicPdfExtractor final : public TextExtractor {
 public:
  std::string extract(const std::filesystem::path& path) const override {
    const std::string data = fs::read_file(path);
    require(data.rfind("%PDF-", 0) == 0, ErrorCode::kExtractionFailure, path.string() + " lacks a PDF header");
    std::string out;
    std::size_t pos = 0;
    bool any_stream = false;
    while ((pos = data.find("stream", pos)) != std::string::npos) {
      if (pos >= 3 && data.compare(pos - 3, 3, "end") == 0) {
        pos += 6;
        continue;
      }
      std::size_t begin = pos + 6;
      if (begin < data.size() && data[begin] == '\r') ++begin;
      if (begin < data.size() && data[begin] == '\n') ++begin;
      const auto end = data.find("endstream", begin);
      require(end != std::string::npos, ErrorCode::kExtractionFailure, path.string() + ": unterminated stream");
      const auto dict_start = data.rfind("<<", pos);
      const std::string_view dict =
          dict_start == std::string::npos ? std::string_view{} : std::string_view(data).substr(dict_start, pos - dict_start);
      std::string_view raw = std::string_view(data).substr(begin, end - begin);
      while (!raw.empty() && (raw.back() == '\n' || raw.back() == '\r')) raw.remove_suffix(1);
      any_stream = true;
      if (dict.find("/Subtype") != std::string_view::npos && dict.find("/Image") != std::string_view::npos) {
        pos = end + 9;
        continue;
      }
      std::string content = pdf::decode_stream(dict, raw);
      out += pdf::content_text(content);
      pos = end + 9;
    }
    require(any_stream, ErrorCode::kExtractionFailure, path.string() + " has no content streams");
    if (!text::valid_utf8(out)) out = pdf::latin1_to_utf8(out);
    require(!text::trim(out).empty(), ErrorCode::kExtractionFailure, path.string() + " has no extractable text");
    return out;
  }
};

inline TextDocument extract_document_text(const std::filesystem::path& path, const TextExtractor& extractor,
                                          std::string doc_id = {}) {
  require(std::filesystem::exists(path), ErrorCode::kFileMissing, path.string());
  TextDocument doc;
  doc.doc_id = doc_id.empty() ? path.filename().string() : std::move(doc_id);
  doc.source_path = path;
  doc.body = text::collapse_whitespace(text::nfc(extractor.extract(path)));
  doc.token_count = text::count_tokens(doc.body);
  return doc;
}

/// Default extractor per textual format.
inline const TextExtractor& default_extractor(FileFormat format) {
  static const PassThroughExtractor plain;
  static const BasicPdfExtractor pdf_backend;
  return format == FileFormat::kDocumentPdf ? static_cast<const TextExtractor&>(pdf_backend) : plain;
}

inline TextDocument make_document(std::string doc_id, std::string body) {
  TextDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.body = std::move(body);
  doc.token_count = text::count_tokens(doc.body);
  return doc;
}

}  // namespace datascout::ingest
