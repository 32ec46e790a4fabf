// core/src/harness/figure.cc
#include "revoice/harness/figure.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <zlib.h>

#include "revoice/base/error.h"
#include "revoice/mel.h"

namespace revoice::harness {

namespace {

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& data) {
  std::vector<uint8_t> len;
  put_u32_be(len, static_cast<uint32_t>(data.size()));
  out.write(reinterpret_cast<const char*>(len.data()), 4);

  std::vector<uint8_t> body(type, type + 4);
  body.insert(body.end(), data.begin(), data.end());
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));

  const uint32_t crc = static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  std::vector<uint8_t> crc_bytes;
  put_u32_be(crc_bytes, crc);
  out.write(reinterpret_cast<const char*>(crc_bytes.data()), 4);
}

// 5x7 glyphs for panel captions; unknown characters render blank.
const std::map<char, std::array<const char*, 7>>& font() {
  static const std::map<char, std::array<const char*, 7>> f = {
      {'A', {{" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}}},
      {'D', {{"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}}},
      {'E', {{"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}}},
      {'I', {{"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "#####"}}},
      {'N', {{"#   #", "##  #", "## # ", "# # #", " # ##", "#  ##", "#   #"}}},
      {'O', {{" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}}},
      {'P', {{"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}}},
      {'R', {{"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}}},
      {'S', {{" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}}},
      {'T', {{"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}}},
      {'U', {{"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}}},
      {'Y', {{"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}}},
      {' ', {{"     ", "     ", "     ", "     ", "     ", "     ", "     "}}},
  };
  return f;
}

void draw_text(std::vector<uint8_t>& rgb, int width, int x0, int y0, const std::string& text) {
  int x = x0;
  for (char c : text) {
    auto it = font().find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (it != font().end()) {
      for (int r = 0; r < 7; ++r) {
        for (int col = 0; col < 5; ++col) {
          if (it->second[static_cast<size_t>(r)][col] == '#') {
            const int px = x + col, py = y0 + r;
            const size_t idx = 3 * (static_cast<size_t>(py) * width + px);
            rgb[idx] = rgb[idx + 1] = rgb[idx + 2] = 235;
          }
        }
      }
    }
    x += 6;
  }
}

// compact inferno-like ramp
void colormap(double v, uint8_t* px) {
  static constexpr double kStops[6][3] = {{0.0, 0.0, 0.1},  {0.2, 0.03, 0.35},
                                          {0.55, 0.1, 0.4}, {0.85, 0.29, 0.2},
                                          {0.98, 0.65, 0.1}, {0.99, 0.95, 0.65}};
  v = std::clamp(v, 0.0, 1.0);
  const double pos = v * 5.0;
  const int lo = std::min(4, static_cast<int>(pos));
  const double f = pos - lo;
  for (int c = 0; c < 3; ++c) {
    const double mixed = kStops[lo][c] * (1.0 - f) + kStops[lo + 1][c] * f;
    px[c] = static_cast<uint8_t>(std::lround(mixed * 255.0));
  }
}

}  // namespace

void write_png(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb) {
  if (static_cast<size_t>(width) * height * 3 != rgb.size()) {
    throw DataError("write_png: buffer size mismatch");
  }
  // raw scanlines with filter byte 0
  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(height) * (1 + 3 * static_cast<size_t>(width)));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const uint8_t* row = rgb.data() + 3 * static_cast<size_t>(y) * width;
    raw.insert(raw.end(), row, row + 3 * static_cast<size_t>(width));
  }

  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> compressed(comp_size);
  if (compress2(compressed.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw DataError("write_png: zlib compression failed");
  }
  compressed.resize(comp_size);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write figure: " + path);
  static constexpr uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  out.write(reinterpret_cast<const char*>(kSig), 8);

  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<uint32_t>(width));
  put_u32_be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  write_chunk(out, "IHDR", ihdr);
  write_chunk(out, "IDAT", compressed);
  write_chunk(out, "IEND", {});
  if (!out) throw DataError("write failure: " + path);
}

FigureInfo emit_figure(const Waveform& noisy, const Waveform& ns_out,
                       const Waveform& restored, const std::string& path) {
  const std::array<const Waveform*, 3> wavs = {&noisy, &ns_out, &restored};
  const std::array<std::string, 3> titles = {"NOISY INPUT", "NS OUTPUT", "RESTORED"};

  std::array<MelSpectrogram, 3> mels;
  int64_t frames = INT64_MAX;
  for (size_t i = 0; i < 3; ++i) {
    mels[i] = mel_analyze(*wavs[i]);
    frames = std::min(frames, mels[i].frames());
  }
  if (frames < 1) throw DataError("emit_figure: empty inputs");

  double lo = 1e30, hi = -1e30;
  for (const auto& m : mels) {
    lo = std::min(lo, m.values.topRows(frames).minCoeff());
    hi = std::max(hi, m.values.topRows(frames).maxCoeff());
  }
  if (hi <= lo) hi = lo + 1.0;

  constexpr int kZoomX = 2, kZoomY = 2, kTitleBar = 11, kSeparator = 2;
  const int bands = mels[0].bands();
  const int panel_h = kTitleBar + bands * kZoomY;
  const int width = static_cast<int>(frames) * kZoomX;
  const int height = 3 * panel_h + 2 * kSeparator;

  std::vector<uint8_t> rgb(static_cast<size_t>(width) * height * 3, 16);
  for (size_t p = 0; p < 3; ++p) {
    const int top = static_cast<int>(p) * (panel_h + kSeparator);
    draw_text(rgb, width, 2, top + 2, titles[p]);
    for (int64_t f = 0; f < frames; ++f) {
      for (int b = 0; b < bands; ++b) {
        const double v = (mels[p].values(f, b) - lo) / (hi - lo);
        uint8_t px[3];
        colormap(v, px);
        // low frequencies at the bottom of each panel
        const int y0 = top + kTitleBar + (bands - 1 - b) * kZoomY;
        const int x0 = static_cast<int>(f) * kZoomX;
        for (int dy = 0; dy < kZoomY; ++dy) {
          for (int dx = 0; dx < kZoomX; ++dx) {
            const size_t idx = 3 * (static_cast<size_t>(y0 + dy) * width + (x0 + dx));
            rgb[idx] = px[0];
            rgb[idx + 1] = px[1];
            rgb[idx + 2] = px[2];
          }
        }
      }
    }
  }

  write_png(path, width, height, rgb);
  FigureInfo info;
  info.width = width;
  info.height = height;
  info.panels = 3;
  info.panel_height = panel_h;
  info.frames = frames;
  return info;
}

}  // namespace revoice::harness
