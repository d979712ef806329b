#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "nse/audio.hpp"
#include "nse/errors.hpp"
#include "nse/log.hpp"

namespace nse {

namespace {

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  std::memcpy(&v, p, 4);
  return v;
}

uint16_t get_u16(const char* p) {
  uint16_t v = 0;
  std::memcpy(&v, p, 2);
  return v;
}

}  // namespace

void write_wav(const std::string& path, const AudioClip& clip, bool ieee_float) {
  clip.validate();
  const auto n = static_cast<uint32_t>(clip.samples.size());
  const uint16_t format = ieee_float ? 3 : 1;
  const uint16_t bits = ieee_float ? 32 : 16;
  const uint16_t block_align = bits / 8;
  const uint32_t data_bytes = n * block_align;

  std::string payload;
  payload.reserve(data_bytes);
  if (ieee_float) {
    for (double v : clip.samples) {
      const float f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      payload.append(b, 4);
    }
  } else {
    for (double v : clip.samples) {
      const double scaled = std::clamp(v, -1.0, 1.0) * 32767.0;
      const auto s = static_cast<int16_t>(std::lround(scaled));
      char b[2];
      std::memcpy(b, &s, 2);
      payload.append(b, 2);
    }
  }

  std::string body;
  body += "WAVE";
  body += "fmt ";
  put_u32(body, 16);
  put_u16(body, format);
  put_u16(body, 1);  // mono
  put_u32(body, static_cast<uint32_t>(clip.sample_rate_hz));
  put_u32(body, static_cast<uint32_t>(clip.sample_rate_hz) * block_align);
  put_u16(body, block_align);
  put_u16(body, bits);
  if (ieee_float) {
    body += "fact";
    put_u32(body, 4);
    put_u32(body, n);
  }
  body += "data";
  put_u32(body, data_bytes);
  body += payload;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "RIFF";
  std::string size;
  put_u32(size, static_cast<uint32_t>(body.size()));
  out << size << body;
  if (!out) throw IoError("short write to '" + path + "'");
}

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw ParseError("'" + path + "': not a RIFF/WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t size = get_u32(bytes.data() + pos + 4);
    const std::size_t chunk_start = pos + 8;
    if (chunk_start + size > bytes.size())
      throw ParseError("'" + path + "': truncated chunk '" + id + "' at byte offset " +
                       std::to_string(pos));
    if (id == "fmt ") {
      if (size < 16) throw ParseError("'" + path + "': fmt chunk too small");
      format = get_u16(bytes.data() + chunk_start);
      channels = get_u16(bytes.data() + chunk_start + 2);
      sample_rate = get_u32(bytes.data() + chunk_start + 4);
      bits = get_u16(bytes.data() + chunk_start + 14);
      have_fmt = true;
    } else if (id == "data") {
      data_offset = chunk_start;
      data_size = size;
    }
    pos = chunk_start + size + (size % 2);  // chunks are word-aligned
  }
  if (!have_fmt || data_offset == 0)
    throw ParseError("'" + path + "': missing fmt or data chunk");
  if (channels == 0) throw ParseError("'" + path + "': zero channels");
  if (!((format == 1 && bits == 16) || (format == 3 && bits == 32)))
    throw ParseError("'" + path + "': unsupported format (only PCM16 and float32)");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_bytes;
  if (channels > 1)
    log_warn("read_wav: '" + path + "' has " + std::to_string(channels) +
             " channels; averaging to mono");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(sample_rate);
  clip.samples.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const char* p = bytes.data() + data_offset + f * frame_bytes + c * bytes_per_sample;
      if (format == 1) {
        int16_t v = 0;
        std::memcpy(&v, p, 2);
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v = 0.0f;
        std::memcpy(&v, p, 4);
        acc += static_cast<double>(v);
      }
    }
    clip.samples[f] = acc / channels;
  }
  clip.validate();
  return clip;
}

}  // namespace nse
