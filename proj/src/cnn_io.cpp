#include "astro/cnn_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace astro {

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<uint32_t>(f)); }

struct Reader {
  const unsigned char* p;
  size_t left;
  std::string path;

  void need(size_t n, const char* what) {
    if (left < n) {
      throw std::runtime_error(path + ": truncated model file while reading " + std::string(what));
    }
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                 static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    p += 4;
    left -= 4;
    return v;
  }
  uint8_t u8(const char* what) {
    need(1, what);
    uint8_t v = *p;
    ++p;
    --left;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
};

}  // namespace

void save_model(const CnnModel& model, const std::string& path) {
  std::string bytes = "CNN1";
  put_u32(bytes, kVersion);
  put_u32(bytes, static_cast<uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    put_u32(bytes, static_cast<uint32_t>(l.out_channels));
    put_u32(bytes, static_cast<uint32_t>(l.in_channels));
    put_u32(bytes, static_cast<uint32_t>(l.kh));
    put_u32(bytes, static_cast<uint32_t>(l.kw));
    bytes.push_back(l.relu ? 1 : 0);
    for (float w : l.weights) put_f32(bytes, w);
    for (float b : l.biases) put_f32(bytes, b);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

CnnModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || bytes.compare(0, 4, "CNN1") != 0) {
    throw std::runtime_error(path + ": bad magic, not a CNN1 model file");
  }
  Reader r{reinterpret_cast<const unsigned char*>(bytes.data()) + 4, bytes.size() - 4, path};
  uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported CNN1 version " + std::to_string(version));
  }
  uint32_t count = r.u32("layer count");
  if (count == 0 || count > 64) {
    throw std::runtime_error(path + ": unreasonable layer count " + std::to_string(count));
  }

  CnnModel m;
  for (uint32_t k = 0; k < count; ++k) {
    ConvLayer l;
    l.out_channels = static_cast<int>(r.u32("out_channels"));
    l.in_channels = static_cast<int>(r.u32("in_channels"));
    l.kh = static_cast<int>(r.u32("kh"));
    l.kw = static_cast<int>(r.u32("kw"));
    if (l.out_channels < 1 || l.in_channels < 1 || l.kh < 1 || l.kw < 1 ||
        l.weight_count() > (1u << 28)) {
      throw std::runtime_error(path + ": implausible layer geometry in layer " +
                               std::to_string(k));
    }
    l.relu = r.u8("relu flag") != 0;
    l.weights.resize(l.weight_count());
    for (auto& w : l.weights) w = r.f32("weights");
    l.biases.resize(l.out_channels);
    for (auto& b : l.biases) b = r.f32("biases");
    m.layers.push_back(std::move(l));
  }
  if (r.left != 0) throw std::runtime_error(path + ": trailing data after model payload");

  if (m.layers.front().in_channels != 1 || m.layers.back().out_channels != 1) {
    throw std::runtime_error(path + ": model must map one channel to one channel");
  }
  for (size_t k = 1; k < m.layers.size(); ++k) {
    if (m.layers[k].in_channels != m.layers[k - 1].out_channels) {
      throw std::runtime_error(path + ": channel chaining violated at layer " + std::to_string(k));
    }
  }
  m.input_window = m.receptive_field() + 13;  // paper windows: 14x14 out of 32x32 in
  m.output_window = 14;
  return m;
}

}  // namespace astro
