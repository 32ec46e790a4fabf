// core/include/revoice/harness/figure.h
#ifndef REVOICE_HARNESS_FIGURE_H_
#define REVOICE_HARNESS_FIGURE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "revoice/audio.h"

namespace revoice::harness {

struct FigureInfo {
  int width = 0;
  int height = 0;
  int panels = 0;
  int panel_height = 0;
  int64_t frames = 0;  // shared time axis length
};

// Three stacked Mel-spectrogram panels (noisy / NS output / restored) with a
// shared time axis and value scale, written as a PNG. Rendering is
// deterministic: identical inputs produce byte-identical files.
FigureInfo emit_figure(const Waveform& noisy, const Waveform& ns_out,
                       const Waveform& restored, const std::string& path);

// Minimal PNG writer (8-bit RGB, fixed zlib settings). Rows are packed RGB.
void write_png(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb);

}  // namespace revoice::harness

#endif  // REVOICE_HARNESS_FIGURE_H_
