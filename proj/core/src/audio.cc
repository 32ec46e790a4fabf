// core/src/audio.cc
#include "revoice/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "revoice/base/error.h"

namespace revoice {

void validate(const Waveform& w, const std::string& context) {
  if (w.sample_rate <= 0) {
    throw DataError(context + ": sample_rate must be positive, got " +
                    std::to_string(w.sample_rate));
  }
  for (double s : w.samples) {
    if (!std::isfinite(s)) {
      throw DataError(context + ": waveform contains non-finite samples");
    }
  }
}

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file: " + path);

  char riff[4], wave[4];
  in.read(riff, 4);
  read_u32(in);  // riff size
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  std::vector<int16_t> pcm;
  bool got_fmt = false, got_data = false;

  while (in && !(got_fmt && got_data)) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    uint32_t chunk_size = read_u32(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!got_fmt) throw DataError("wav data chunk precedes fmt chunk: " + path);
      pcm.resize(chunk_size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(pcm.size() * 2));
      got_data = true;
    } else {
      // skip unknown chunk (padded to even size)
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }

  if (!got_fmt || !got_data) throw DataError("truncated wav file: " + path);
  if (format != 1) throw DataError("only 16-bit PCM wav is supported (format tag " +
                                   std::to_string(format) + "): " + path);
  if (bits != 16) throw DataError("only 16-bit PCM wav is supported (got " +
                                  std::to_string(bits) + " bits): " + path);
  if (channels != 1) {
    throw DataError("multichannel wav not supported (" + std::to_string(channels) +
                    " channels): " + path);
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(pcm.size());
  for (size_t i = 0; i < pcm.size(); ++i) w.samples[i] = pcm[i] / 32768.0;
  validate(w, "read_wav(" + path + ")");
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  validate(w, "write_wav(" + path + ")");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write wav file: " + path);

  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, static_cast<uint32_t>(w.sample_rate));
  write_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (double s : w.samples) {
    double v = std::clamp(s, -1.0, 1.0) * 32767.0;
    int16_t q = static_cast<int16_t>(std::lrint(v));
    char b[2] = {static_cast<char>(q & 0xff), static_cast<char>((q >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw DataError("write failure: " + path);
}

Waveform resample(const Waveform& w, int target_rate) {
  if (w.sample_rate <= 0 || target_rate <= 0) {
    throw DataError("resample: rates must be positive");
  }
  if (target_rate == w.sample_rate) return w;

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const int64_t out_len = static_cast<int64_t>(std::llround(w.samples.size() * ratio));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<size_t>(std::max<int64_t>(out_len, 0)), 0.0);
  if (w.samples.empty() || out_len <= 0) return out;

  // Windowed-sinc interpolation. When downsampling, the kernel cutoff shrinks
  // to the target Nyquist and the support widens to keep attenuation.
  const double cutoff = std::min(1.0, ratio) * 0.945;
  const int half_width = static_cast<int>(std::ceil(32.0 / std::min(1.0, ratio)));
  const int64_t n = static_cast<int64_t>(w.samples.size());

  for (int64_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) / ratio;  // position in input domain
    const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(t)) - half_width);
    const int64_t hi = std::min<int64_t>(n - 1, static_cast<int64_t>(std::floor(t)) + half_width);
    double acc = 0.0;
    for (int64_t m = lo; m <= hi; ++m) {
      const double d = t - static_cast<double>(m);
      double sinc;
      if (std::abs(d) < 1e-12) {
        sinc = cutoff;
      } else {
        sinc = std::sin(M_PI * cutoff * d) / (M_PI * d);
      }
      // Blackman window over the kernel support
      const double u = (d / half_width + 1.0) * 0.5;  // in [0,1] across support
      const double win = 0.42 - 0.5 * std::cos(2.0 * M_PI * u) + 0.08 * std::cos(4.0 * M_PI * u);
      acc += w.samples[static_cast<size_t>(m)] * sinc * win;
    }
    out.samples[static_cast<size_t>(i)] = acc;
  }
  return out;
}

double rms(const std::vector<double>& x) {
  return std::sqrt(mean_power(x));
}

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

}  // namespace revoice
