#pragma once

// Binary PGM (P5, maxval 255) reader/writer for debug dumps and golden fixtures.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aislenav/core.hpp"

namespace aislenav {

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto px = img.pixels();
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw std::runtime_error("short write to " + path.string());
}

namespace detail {
inline int read_pgm_int(std::istream& is) {
  int c = is.get();
  for (;;) {
    while (c != EOF && std::isspace(c)) c = is.get();
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
      continue;
    }
    break;
  }
  if (c == EOF || !std::isdigit(c)) throw std::runtime_error("malformed PGM header");
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = is.get();
  }
  return v;  // the single whitespace after the token has been consumed
}
}  // namespace detail

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[2]{};
  is.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') throw std::runtime_error(path.string() + ": not a P5 PGM");
  const int w = detail::read_pgm_int(is);
  const int h = detail::read_pgm_int(is);
  const int maxval = detail::read_pgm_int(is);
  if (maxval != 255) throw std::runtime_error(path.string() + ": only maxval 255 is supported");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (is.gcount() != static_cast<std::streamsize>(data.size()))
    throw std::runtime_error(path.string() + ": truncated pixel data");
  return GrayImage(w, h, std::move(data));
}

}  // namespace aislenav
