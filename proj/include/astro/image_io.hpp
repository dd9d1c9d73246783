#pragma once

#include <cstddef>
#include <string>

#include "astro/image.hpp"

namespace astro {

// IMF1: "IMF1 <height> <width>\n" followed by row-major little-endian f32,
// bit-exact round-trips.
void write_imf1(const Image& img, const std::string& path);
Image read_imf1(const std::string& path);

// Single IMF1 block as bytes, for embedding in container files.
std::string imf1_bytes(const Image& img);
// Consumes one block from a buffer, advancing cursor/left; throws on malformed
// or truncated input.
Image parse_imf1_block(const char*& cursor, size_t& left, const std::string& context);

// Binary PGM (P5), 8- or 16-bit; 16-bit samples are big-endian per the format.
// Values are clamped to [0,1] and quantized on write.
void write_pgm(const Image& img, const std::string& path, int bit_depth = 16);
Image read_pgm(const std::string& path);

// Dispatch on magic bytes (read) or file extension (write).
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

}  // namespace astro
