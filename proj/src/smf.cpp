/**
 * @file smf.cpp
 * @brief Standard MIDI File chunk parsing and serialization.
 */
#include "accord/smf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>

#include "accord/error.hpp"

namespace accord::smf {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool atEnd() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint8_t peek() {
    need(1);
    return bytes_[pos_];
  }
  std::uint32_t be(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    fail("variable-length quantity longer than 4 bytes");
  }
  std::vector<std::uint8_t> take(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("MIDI: " + what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail("unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

int dataBytesFor(std::uint8_t status) {
  const int type = status & 0xF0;
  return (type == 0xC0 || type == 0xD0) ? 1 : 2;
}

MidiTrack parseTrack(Reader& r, std::size_t end) {
  MidiTrack track;
  std::uint32_t tick = 0;
  std::uint8_t running = 0;
  while (r.pos() < end) {
    tick += r.vlq();
    MidiEvent ev;
    ev.tick = tick;
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else {
      if (!running) r.fail("data byte without running status");
      status = running;
    }
    if (status == 0xFF) {
      ev.kind = EventKind::Meta;
      ev.status = status;
      ev.meta_type = r.u8();
      ev.data = r.take(r.vlq());
      track.events.push_back(std::move(ev));
      if (track.events.back().meta_type == 0x2F) break;
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      ev.kind = EventKind::SysEx;
      ev.status = status;
      ev.data = r.take(r.vlq());
      running = 0;
      track.events.push_back(std::move(ev));
      continue;
    }
    if (status >= 0xF0) r.fail("unsupported system message");
    running = status;
    ev.kind = EventKind::Channel;
    ev.status = status;
    for (int i = 0; i < dataBytesFor(status); ++i) {
      const std::uint8_t b = r.u8();
      if (b & 0x80) r.fail("channel data byte with high bit set");
      ev.data.push_back(b);
    }
    track.events.push_back(std::move(ev));
  }
  if (r.pos() > end) r.fail("track overruns its chunk");
  r.skip(end - r.pos());
  return track;
}

void putBe(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void putVlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

}  // namespace

std::string MidiTrack::name() const {
  for (const auto& e : events) {
    if (e.kind == EventKind::Meta && e.meta_type == 0x03) return std::string(e.data.begin(), e.data.end());
  }
  return {};
}

MidiFile parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.remaining() < 14 || r.be(4) != 0x4D546864) r.fail("missing MThd header");
  const std::uint32_t header_len = r.be(4);
  if (header_len < 6) r.fail("short MThd chunk");
  MidiFile file;
  file.format = static_cast<int>(r.be(2));
  const std::uint32_t ntracks = r.be(2);
  const std::uint32_t division = r.be(2);
  r.skip(header_len - 6);
  if (file.format > 1) r.fail("format " + std::to_string(file.format) + " is not supported");
  if (division & 0x8000) r.fail("SMPTE time division is not supported");
  if (division == 0) r.fail("zero ticks per quarter note");
  file.ticks_per_quarter = static_cast<int>(division);

  while (!r.atEnd() && file.tracks.size() < ntracks) {
    if (r.remaining() < 8) r.fail("truncated chunk header");
    const std::uint32_t id = r.be(4);
    const std::uint32_t len = r.be(4);
    if (len > r.remaining()) r.fail("chunk length exceeds file size");
    if (id != 0x4D54726B) {  // unknown chunk: skip
      r.skip(len);
      continue;
    }
    file.tracks.push_back(parseTrack(r, r.pos() + len));
  }
  if (file.tracks.size() != ntracks) throw DataError("MIDI: header declares " + std::to_string(ntracks) +
                                                      " tracks, found " + std::to_string(file.tracks.size()));
  return file;
}

MidiFile readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> serialize(const MidiFile& file) {
  std::vector<std::uint8_t> out;
  putBe(out, 0x4D546864, 4);
  putBe(out, 6, 4);
  putBe(out, static_cast<std::uint32_t>(file.format), 2);
  putBe(out, static_cast<std::uint32_t>(file.tracks.size()), 2);
  putBe(out, static_cast<std::uint32_t>(file.ticks_per_quarter), 2);
  for (const auto& track : file.tracks) {
    std::vector<std::uint8_t> body;
    std::uint32_t last = 0;
    bool ended = false;
    for (const auto& e : track.events) {
      if (ended) break;
      putVlq(body, e.tick - std::min(last, e.tick));
      last = std::max(last, e.tick);
      switch (e.kind) {
        case EventKind::Channel:
          body.push_back(e.status);
          body.insert(body.end(), e.data.begin(), e.data.end());
          break;
        case EventKind::Meta:
          body.push_back(0xFF);
          body.push_back(e.meta_type);
          putVlq(body, static_cast<std::uint32_t>(e.data.size()));
          body.insert(body.end(), e.data.begin(), e.data.end());
          ended = e.meta_type == 0x2F;
          break;
        case EventKind::SysEx:
          body.push_back(e.status);
          putVlq(body, static_cast<std::uint32_t>(e.data.size()));
          body.insert(body.end(), e.data.begin(), e.data.end());
          break;
      }
    }
    if (!ended) {
      body.push_back(0x00);
      body.insert(body.end(), {0xFF, 0x2F, 0x00});
    }
    putBe(out, 0x4D54726B, 4);
    putBe(out, static_cast<std::uint32_t>(body.size()), 4);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

void writeFile(const MidiFile& file, const std::filesystem::path& path) {
  const auto bytes = serialize(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<NoteSpan> extractNotes(const MidiTrack& track) {
  std::map<std::pair<int, int>, std::deque<NoteSpan>> open;
  std::vector<NoteSpan> out;
  std::uint32_t last_tick = 0;
  for (const auto& e : track.events) {
    last_tick = std::max(last_tick, e.tick);
    if (e.isNoteOn()) {
      open[{e.channel(), e.data[0]}].push_back({e.tick, e.tick, e.data[0], e.data[1], e.channel()});
    } else if (e.isNoteOff()) {
      auto it = open.find({e.channel(), e.data[0]});
      if (it == open.end() || it->second.empty()) continue;
      NoteSpan n = it->second.front();
      it->second.pop_front();
      n.off_tick = e.tick;
      out.push_back(n);
    }
  }
  for (auto& [key, queue] : open) {
    for (auto n : queue) {
      n.off_tick = last_tick;
      out.push_back(n);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const NoteSpan& a, const NoteSpan& b) {
    return a.on_tick != b.on_tick ? a.on_tick < b.on_tick : a.pitch < b.pitch;
  });
  return out;
}

MidiEvent noteOn(std::uint32_t tick, int channel, int pitch, int velocity) {
  return {tick, EventKind::Channel, static_cast<std::uint8_t>(0x90 | (channel & 0x0F)), 0,
          {static_cast<std::uint8_t>(pitch & 0x7F), static_cast<std::uint8_t>(velocity & 0x7F)}};
}

MidiEvent noteOff(std::uint32_t tick, int channel, int pitch) {
  return {tick, EventKind::Channel, static_cast<std::uint8_t>(0x80 | (channel & 0x0F)), 0,
          {static_cast<std::uint8_t>(pitch & 0x7F), 0}};
}

MidiEvent programChange(std::uint32_t tick, int channel, int program) {
  return {tick, EventKind::Channel, static_cast<std::uint8_t>(0xC0 | (channel & 0x0F)), 0,
          {static_cast<std::uint8_t>(program & 0x7F)}};
}

MidiEvent trackName(std::uint32_t tick, const std::string& name) {
  return {tick, EventKind::Meta, 0xFF, 0x03, std::vector<std::uint8_t>(name.begin(), name.end())};
}

MidiEvent tempo(std::uint32_t tick, double bpm) {
  const auto usec = static_cast<std::uint32_t>(std::lround(60'000'000.0 / bpm));
  return {tick, EventKind::Meta, 0xFF, 0x51,
          {static_cast<std::uint8_t>(usec >> 16), static_cast<std::uint8_t>(usec >> 8),
           static_cast<std::uint8_t>(usec)}};
}

MidiEvent timeSignature(std::uint32_t tick, int numerator, int denominator) {
  std::uint8_t pow2 = 0;
  while ((1 << pow2) < denominator) ++pow2;
  return {tick, EventKind::Meta, 0xFF, 0x58, {static_cast<std::uint8_t>(numerator), pow2, 24, 8}};
}

}  // namespace accord::smf
