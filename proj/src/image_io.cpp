#include "astro/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string_view>

namespace astro {

namespace {

void put_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

std::string imf1_bytes(const Image& img) {
  std::string bytes = "IMF1 " + std::to_string(img.height) + " " + std::to_string(img.width) + "\n";
  bytes.reserve(bytes.size() + img.data.size() * 4);
  for (float v : img.data) put_u32_le(bytes, std::bit_cast<uint32_t>(v));
  return bytes;
}

Image parse_imf1_block(const char*& cursor, size_t& left, const std::string& context) {
  const std::string_view head(cursor, std::min<size_t>(left, 64));
  if (head.size() < 5 || head.compare(0, 5, "IMF1 ") != 0) {
    throw std::runtime_error(context + ": not an IMF1 block (bad magic)");
  }
  size_t eol = head.find('\n');
  if (eol == std::string_view::npos) {
    throw std::runtime_error(context + ": malformed IMF1 header (no newline)");
  }
  long long hh = 0, ww = 0;
  if (std::sscanf(std::string(head.substr(0, eol)).c_str(), "IMF1 %lld %lld", &hh, &ww) != 2) {
    throw std::runtime_error(context + ": malformed IMF1 header");
  }
  if (hh < 1 || ww < 1 || hh > (1 << 20) || ww > (1 << 20) || hh * ww > (1LL << 30)) {
    throw std::runtime_error(context + ": unreasonable IMF1 dimensions " + std::to_string(hh) +
                             "x" + std::to_string(ww));
  }
  cursor += eol + 1;
  left -= eol + 1;
  const size_t need = static_cast<size_t>(hh) * ww * 4;
  if (left < need) {
    throw std::runtime_error(context + ": truncated IMF1 payload, expected " +
                             std::to_string(need) + " bytes, got " + std::to_string(left));
  }
  std::vector<float> data(static_cast<size_t>(hh) * ww);
  const auto* p = reinterpret_cast<const unsigned char*>(cursor);
  for (size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32_le(p + i * 4));
  }
  cursor += need;
  left -= need;
  Image img = Image::from_data(static_cast<int>(hh), static_cast<int>(ww), std::move(data));
  if (!all_finite(img)) throw std::runtime_error(context + ": non-finite sample in IMF1 payload");
  return img;
}

void write_imf1(const Image& img, const std::string& path) { write_file(path, imf1_bytes(img)); }

Image read_imf1(const std::string& path) {
  std::string bytes = read_file(path);
  const char* cursor = bytes.data();
  size_t left = bytes.size();
  Image img = parse_imf1_block(cursor, left, path);
  if (left != 0) throw std::runtime_error(path + ": trailing data after IMF1 payload");
  return img;
}

namespace {

// PNM header tokens, skipping whitespace and '#' comments.
long long next_pnm_token(const std::string& bytes, size_t& pos, const std::string& path) {
  while (pos < bytes.size()) {
    char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    throw std::runtime_error(path + ": malformed PGM header");
  }
  long long v = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > (1LL << 40)) throw std::runtime_error(path + ": PGM header value overflow");
    ++pos;
  }
  return v;
}

}  // namespace

void write_pgm(const Image& img, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw std::invalid_argument("PGM bit depth must be 8 or 16");
  }
  const int maxval = bit_depth == 8 ? 255 : 65535;
  std::string bytes = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n" + std::to_string(maxval) + "\n";
  bytes.reserve(bytes.size() + img.data.size() * (bit_depth / 8));
  for (float v : img.data) {
    float clamped = std::clamp(v, 0.0f, 1.0f);
    auto q = static_cast<uint32_t>(std::lround(static_cast<double>(clamped) * maxval));
    if (bit_depth == 8) {
      bytes.push_back(static_cast<char>(q));
    } else {
      bytes.push_back(static_cast<char>(q >> 8));  // big-endian
      bytes.push_back(static_cast<char>(q & 0xff));
    }
  }
  write_file(path, bytes);
}

Image read_pgm(const std::string& path) {
  std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw std::runtime_error(path + ": not a binary PGM (bad magic)");
  }
  size_t pos = 2;
  long long w = next_pnm_token(bytes, pos, path);
  long long h = next_pnm_token(bytes, pos, path);
  long long maxval = next_pnm_token(bytes, pos, path);
  if (w < 1 || h < 1 || h * w > (1LL << 30)) {
    throw std::runtime_error(path + ": unreasonable PGM dimensions");
  }
  if (maxval < 1 || maxval > 65535) {
    throw std::runtime_error(path + ": unsupported PGM maxval " + std::to_string(maxval));
  }
  ++pos;  // single whitespace byte after maxval
  const int bytes_per = maxval > 255 ? 2 : 1;
  size_t need = static_cast<size_t>(h) * w * bytes_per;
  if (bytes.size() - pos < need) {
    throw std::runtime_error(path + ": truncated PGM payload");
  }
  std::vector<float> data(static_cast<size_t>(h) * w);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (size_t i = 0; i < data.size(); ++i) {
    uint32_t q = bytes_per == 1 ? p[i] : (static_cast<uint32_t>(p[i * 2]) << 8 | p[i * 2 + 1]);
    data[i] = static_cast<float>(static_cast<double>(q) / static_cast<double>(maxval));
  }
  return Image::from_data(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

Image read_image(const std::string& path) {
  std::string head;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char buf[5] = {};
    in.read(buf, 5);
    head.assign(buf, static_cast<size_t>(in.gcount()));
  }
  if (head.rfind("IMF1", 0) == 0) return read_imf1(path);
  if (head.rfind("P5", 0) == 0) return read_pgm(path);
  throw std::runtime_error(path + ": unsupported image format (magic '" + head + "')");
}

void write_image(const Image& img, const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".imf1") {
    write_imf1(img, path);
  } else if (ext == ".pgm") {
    write_pgm(img, path, 16);
  } else {
    throw std::runtime_error("cannot infer image format from extension of " + path +
                             " (use .imf1 or .pgm)");
  }
}

}  // namespace astro
