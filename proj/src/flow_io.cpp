#include "erpflow/flow_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "erpflow/errors.hpp"

namespace erpflow {

namespace {

constexpr float kFloMagic = 202021.25f;  // bytes spell "PIEH"
constexpr std::int64_t kMaxDim = 1 << 20;

std::vector<char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> buf(static_cast<size_t>(size));
  in.read(buf.data(), size);
  if (!in) throw std::runtime_error("read failed on " + path);
  return buf;
}

}  // namespace

FlowField<float> read_flo(const std::string& path) {
  const std::vector<char> buf = read_all(path);
  if (buf.size() < 12) throw TruncatedFile(path + ": shorter than the .flo header");
  float magic;
  std::int32_t w, h;
  std::memcpy(&magic, buf.data(), 4);
  std::memcpy(&w, buf.data() + 4, 4);
  std::memcpy(&h, buf.data() + 8, 4);
  if (magic != kFloMagic) throw BadMagic(path + ": not a .flo file");
  if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
    throw SizeMismatch(path + ": implausible dimensions in header");
  const std::size_t expected = 12 + std::size_t(8) * w * h;
  if (buf.size() < expected) throw TruncatedFile(path + ": file shorter than header promises");
  if (buf.size() > expected) throw SizeMismatch(path + ": trailing bytes after flow data");

  FlowField<float> flow = FlowField<float>::zero(ErpGrid{w, h});
  const char* p = buf.data() + 12;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      std::memcpy(&flow.u(j, i), p, 4);
      std::memcpy(&flow.v(j, i), p + 4, 4);
      p += 8;
    }
  }
  return flow;
}

void write_flo(const std::string& path, const FlowField<float>& flow) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::int32_t w = flow.grid.width, h = flow.grid.height;
  out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      out.write(reinterpret_cast<const char*>(&flow.u(j, i)), 4);
      out.write(reinterpret_cast<const char*>(&flow.v(j, i)), 4);
    }
  }
  if (!out) throw std::runtime_error("write failed on " + path);
}

ErpImage<float> read_pfm(const std::string& path) {
  const std::vector<char> buf = read_all(path);
  std::istringstream header(std::string(buf.data(), std::min<std::size_t>(buf.size(), 256)));
  std::string tag;
  int w = 0, h = 0;
  double scale = 0.0;
  header >> tag >> w >> h >> scale;
  if (tag != "Pf" && tag != "PF") throw BadMagic(path + ": not a PFM file");
  if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim)
    throw SizeMismatch(path + ": implausible PFM dimensions");
  if (scale > 0) throw SizeMismatch(path + ": big-endian PFM is not supported");
  const int channels = (tag == "PF") ? 3 : 1;
  // Pixel data starts after the single whitespace byte that follows the scale.
  const std::size_t offset = static_cast<std::size_t>(header.tellg()) + 1;
  const std::size_t expected = offset + std::size_t(4) * channels * w * h;
  if (buf.size() < expected) throw TruncatedFile(path + ": PFM data truncated");

  ErpImage<float> img(ErpGrid{w, h}, channels);
  const char* p = buf.data() + offset;
  for (int j = h - 1; j >= 0; --j) {  // PFM rows run bottom to top
    for (int i = 0; i < w; ++i) {
      for (int c = 0; c < channels; ++c) {
        std::memcpy(&img.planes[c](j, i), p, 4);
        p += 4;
      }
    }
  }
  return img;
}

void write_pfm(const std::string& path, const ErpImage<float>& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw DimensionMismatch("write_pfm: only 1- or 3-channel images");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (img.channels() == 3 ? "PF" : "Pf") << "\n"
      << img.grid.width << " " << img.grid.height << "\n-1.0\n";
  for (int j = img.grid.height - 1; j >= 0; --j)
    for (int i = 0; i < img.grid.width; ++i)
      for (int c = 0; c < img.channels(); ++c)
        out.write(reinterpret_cast<const char*>(&img.planes[c](j, i)), 4);
  if (!out) throw std::runtime_error("write failed on " + path);
}

}  // namespace erpflow
