#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qholo/detection.hpp"
#include "qholo/error.hpp"
#include "qholo/field.hpp"
#include "qholo/holography.hpp"
#include "qholo/image.hpp"

namespace qholo::io {

namespace fs = std::filesystem;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 4);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}
inline std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  is.read(reinterpret_cast<char*>(b.data()), 4);
  require(is.good(), Errc::format_error, "truncated header");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  require(is.good(), Errc::format_error, "truncated header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  require(f.good(), Errc::io_error, "cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  require(f.good(), Errc::io_error, "cannot create " + p.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.flush();
  require(f.good(), Errc::io_error, "write failed: " + p.string());
}

/// Skips whitespace and '#' comments between netpbm header tokens.
inline std::string pnm_token(std::istream& is) {
  std::string tok;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = is.get();
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  require(!tok.empty(), Errc::format_error, "truncated netpbm header");
  return tok;
}

inline std::size_t pnm_number(std::istream& is) {
  const auto tok = pnm_token(is);
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  require(pos == tok.size(), Errc::format_error, "bad netpbm number '" + tok + "'");
  return v;
}

}  // namespace detail

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

inline std::string file_hash(const fs::path& p) { return hex64(fnv1a64(detail::read_file(p))); }

// ---------------------------------------------------------------------------
// BFS1 frame stacks: "BFS1", u32 width, u32 height, u32 stride, u32 arm,
// u64 frame_count (little endian), then frames of height * stride bytes,
// rows bit-packed MSB first.

inline constexpr std::size_t kStackHeaderBytes = 28;

struct StackHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t stride = 0;
  Arm arm = Arm::signal;
  std::uint64_t frames = 0;

  std::size_t frame_bytes() const { return static_cast<std::size_t>(stride) * height; }
};

inline void write_stack_header(std::ostream& os, const StackHeader& h) {
  os.write("BFS1", 4);
  detail::put_u32(os, h.width);
  detail::put_u32(os, h.height);
  detail::put_u32(os, h.stride);
  detail::put_u32(os, static_cast<std::uint32_t>(h.arm));
  detail::put_u64(os, h.frames);
}

inline StackHeader read_stack_header(std::istream& is) {
  char magic[4] = {};
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, "BFS1", 4) == 0, Errc::format_error,
          "not a BFS1 frame stack");
  StackHeader h;
  h.width = detail::get_u32(is);
  h.height = detail::get_u32(is);
  h.stride = detail::get_u32(is);
  const auto arm = detail::get_u32(is);
  h.frames = detail::get_u64(is);
  require(h.width > 0 && h.height > 0, Errc::format_error, "frame stack has zero size");
  require(h.stride == (h.width + 7) / 8, Errc::format_error, "frame stack stride mismatch");
  require(arm <= 1, Errc::format_error, "unknown arm tag");
  h.arm = static_cast<Arm>(arm);
  return h;
}

inline void pack_frame(const PhotonFrame& f, std::size_t stride, std::vector<char>& out) {
  out.assign(stride * f.height, 0);
  for (std::size_t y = 0; y < f.height; ++y)
    for (std::size_t x = 0; x < f.width; ++x)
      if (f.bits[y * f.width + x])
        out[y * stride + x / 8] = static_cast<char>(static_cast<unsigned char>(out[y * stride + x / 8]) |
                                                    (0x80u >> (x % 8)));
}

inline void unpack_frame(const std::vector<char>& in, std::size_t stride, PhotonFrame& f) {
  for (std::size_t y = 0; y < f.height; ++y)
    for (std::size_t x = 0; x < f.width; ++x)
      f.bits[y * f.width + x] =
          (static_cast<unsigned char>(in[y * stride + x / 8]) >> (7 - x % 8)) & 1u;
}

/// Appends frames to a seekable stream. The header count is rewritten on
/// close() and whenever a write fails, so the stream always ends up with a
/// header that describes only complete frames.
class StackWriter {
 public:
  StackWriter(std::iostream& stream, std::uint32_t width, std::uint32_t height, Arm arm,
              std::uint64_t existing_frames = 0)
      : os_(stream) {
    header_.width = width;
    header_.height = height;
    header_.stride = (width + 7) / 8;
    header_.arm = arm;
    header_.frames = existing_frames;
    os_.seekp(0);
    write_stack_header(os_, header_);
    os_.seekp(static_cast<std::streamoff>(kStackHeaderBytes + header_.frame_bytes() * existing_frames));
    require(os_.good(), Errc::io_error, "cannot write frame stack header");
  }

  const StackHeader& header() const { return header_; }
  std::uint64_t frames() const { return header_.frames; }

  void append(const PhotonFrame& f) {
    require(f.width == header_.width && f.height == header_.height, Errc::grid_mismatch,
            "frame size differs from the stack");
    require(f.arm == header_.arm, Errc::invalid_argument, "frame arm differs from the stack");
    pack_frame(f, header_.stride, buf_);
    os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    os_.flush();
    if (!os_.good()) {
      abort_partial();
      throw Error(Errc::io_error, "frame stack write failed after " +
                                      std::to_string(header_.frames) + " frames");
    }
    ++header_.frames;
  }

  void close() {
    os_.seekp(0);
    write_stack_header(os_, header_);
    os_.flush();
    require(os_.good(), Errc::io_error, "cannot finalize frame stack header");
    os_.seekp(0, std::ios::end);
  }

 private:
  void abort_partial() {
    os_.clear();
    os_.seekp(0);
    write_stack_header(os_, header_);
    os_.flush();
  }

  std::iostream& os_;
  StackHeader header_;
  std::vector<char> buf_;
};

class StackReader {
 public:
  explicit StackReader(std::istream& stream) : is_(stream), header_(read_stack_header(stream)) {
    buf_.resize(header_.frame_bytes());
  }

  const StackHeader& header() const { return header_; }
  std::uint64_t frames() const { return header_.frames; }
  std::uint64_t position() const { return next_; }

  bool next(PhotonFrame& f) {
    if (next_ >= header_.frames) return false;
    is_.read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    require(is_.good(), Errc::format_error, "frame stack shorter than its header count");
    f = PhotonFrame(header_.width, header_.height, next_, header_.arm);
    unpack_frame(buf_, header_.stride, f);
    ++next_;
    return true;
  }

 private:
  std::istream& is_;
  StackHeader header_;
  std::vector<char> buf_;
  std::uint64_t next_ = 0;
};

/// File-backed stack writer. With resume_from set, an existing stack is
/// truncated to that many frames (or its stored count if smaller) and
/// extended.
class StackFile {
 public:
  StackFile(const fs::path& path, std::uint32_t width, std::uint32_t height, Arm arm,
            std::optional<std::uint64_t> resume_from = std::nullopt)
      : path_(path) {
    std::uint64_t keep = 0;
    if (resume_from && fs::exists(path)) {
      std::ifstream in(path, std::ios::binary);
      const auto h = read_stack_header(in);
      require(h.width == width && h.height == height && h.arm == arm, Errc::grid_mismatch,
              "existing stack does not match the run: " + path.string());
      const auto size = fs::file_size(path);
      const auto complete = (size - kStackHeaderBytes) / h.frame_bytes();
      keep = std::min({*resume_from, h.frames, static_cast<std::uint64_t>(complete)});
      fs::resize_file(path, kStackHeaderBytes + keep * h.frame_bytes());
      file_.open(path, std::ios::in | std::ios::out | std::ios::binary);
    } else {
      file_.open(path, std::ios::in | std::ios::out | std::ios::binary | std::ios::trunc);
    }
    require(file_.is_open(), Errc::io_error, "cannot open " + path.string());
    writer_.emplace(file_, width, height, arm, keep);
  }

  std::uint64_t frames() const { return writer_->frames(); }

  void append(const PhotonFrame& f) {
    try {
      writer_->append(f);
    } catch (const Error&) {
      file_.close();
      std::error_code ec;
      fs::resize_file(path_, kStackHeaderBytes + writer_->header().frame_bytes() * writer_->frames(), ec);
      throw;
    }
  }

  void close() {
    writer_->close();
    file_.close();
  }

 private:
  fs::path path_;
  std::fstream file_;
  std::optional<StackWriter> writer_;
};

/// Sequential reader that also checks the file holds every counted frame.
class StackFileReader {
 public:
  explicit StackFileReader(const fs::path& path) : file_(path, std::ios::binary) {
    require(file_.good(), Errc::io_error, "cannot open frame stack " + path.string());
    reader_.emplace(file_);
    const auto need = kStackHeaderBytes + reader_->header().frame_bytes() * reader_->frames();
    require(fs::file_size(path) >= need, Errc::format_error,
            "frame stack shorter than its header count: " + path.string());
  }
  const StackHeader& header() const { return reader_->header(); }
  std::uint64_t frames() const { return reader_->frames(); }
  bool next(PhotonFrame& f) { return reader_->next(f); }

 private:
  std::ifstream file_;
  std::optional<StackReader> reader_;
};

// ---------------------------------------------------------------------------
// Hologram: 1-bit PBM (P4, 1 = engraved level) plus a key=value sidecar.

inline fs::path sidecar_path(const fs::path& pbm) { return fs::path(pbm.string() + ".txt"); }

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string encode_pbm(std::size_t width, std::size_t height,
                              const std::vector<std::uint8_t>& bits) {
  std::string out = "P4\n" + std::to_string(width) + " " + std::to_string(height) + "\n";
  const std::size_t stride = (width + 7) / 8;
  std::string body(stride * height, '\0');
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      if (bits[y * width + x])
        body[y * stride + x / 8] =
            static_cast<char>(static_cast<unsigned char>(body[y * stride + x / 8]) | (0x80u >> (x % 8)));
  return out + body;
}

inline void decode_pbm(const std::string& bytes, std::size_t& width, std::size_t& height,
                       std::vector<std::uint8_t>& bits) {
  std::istringstream is(bytes);
  require(detail::pnm_token(is) == "P4", Errc::format_error, "not a binary PBM (P4)");
  width = detail::pnm_number(is);
  height = detail::pnm_number(is);
  require(width > 0 && height > 0, Errc::format_error, "PBM has zero size");
  const std::size_t stride = (width + 7) / 8;
  std::string body(stride * height, '\0');
  is.read(body.data(), static_cast<std::streamsize>(body.size()));
  require(static_cast<std::size_t>(is.gcount()) == body.size(), Errc::format_error, "truncated PBM");
  bits.assign(width * height, 0);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      bits[y * width + x] = (static_cast<unsigned char>(body[y * stride + x / 8]) >> (7 - x % 8)) & 1u;
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                           const std::string& what) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Errc::format_error,
            what + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline void write_hologram(const fs::path& pbm, const PhaseHologram& holo) {
  detail::write_file(pbm, encode_pbm(holo.grid.nx(), holo.grid.ny(), holo.levels));
  std::ostringstream side;
  side << "carrier_x_per_mm=" << format_double(holo.carrier_x_per_mm) << "\n"
       << "carrier_y_per_mm=" << format_double(holo.carrier_y_per_mm) << "\n"
       << "depth_error=" << format_double(holo.depth_error) << "\n"
       << "dx_mm=" << format_double(holo.grid.dx()) << "\n"
       << "dy_mm=" << format_double(holo.grid.dy()) << "\n"
       << "phase_step_rad=" << format_double(holo.phase_step_rad) << "\n"
       << "wavelength_nm=" << format_double(holo.wavelength_mm * 1e6) << "\n";
  detail::write_file(sidecar_path(pbm), side.str());
}

inline PhaseHologram read_hologram(const fs::path& pbm) {
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> bits;
  decode_pbm(detail::read_file(pbm), w, h, bits);
  const auto kv = parse_key_values(detail::read_file(sidecar_path(pbm)), sidecar_path(pbm).string());
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    require(it != kv.end(), Errc::format_error, "hologram sidecar lacks " + k);
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw Error(Errc::format_error, "hologram sidecar: bad value for " + k);
    }
  };
  PhaseHologram holo(Grid2D(w, h, get("dx_mm"), get("dy_mm")));
  holo.levels = std::move(bits);
  holo.phase_step_rad = get("phase_step_rad");
  holo.depth_error = get("depth_error");
  holo.carrier_x_per_mm = get("carrier_x_per_mm");
  holo.carrier_y_per_mm = get("carrier_y_per_mm");
  holo.wavelength_mm = nm_to_mm(get("wavelength_nm"));
  return holo;
}

/// Any binary PBM as a bitmap (for custom targets).
inline Bitmap read_bitmap(const fs::path& pbm) {
  Bitmap b;
  decode_pbm(detail::read_file(pbm), b.width, b.height, b.bits);
  return b;
}

// ---------------------------------------------------------------------------
// 16-bit PGM (P5, maxval 65535, big endian).

enum class PgmScale { linear, decibel };

/// Linear view maps [min, max] onto [0, 65535]; the decibel view maps
/// [floor_db, 0] onto the same range.
inline std::string encode_pgm16(const FrequencyImage& img, PgmScale scale, double floor_db = -30.0) {
  std::vector<double> v = img.values;
  double lo = 0.0, hi = 0.0;
  if (scale == PgmScale::linear) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
  } else {
    lo = floor_db;
    hi = 0.0;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + 2 * v.size());
  for (double x : v) {
    const double t = std::clamp((x - lo) / span, 0.0, 1.0);
    const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xffu));
  }
  return out;
}

inline void write_pgm16(const fs::path& p, const FrequencyImage& img, PgmScale scale,
                        double floor_db = -30.0) {
  detail::write_file(p, encode_pgm16(img, scale, floor_db));
}

/// Reads an 8- or 16-bit binary PGM as raw gray levels.
inline GrayImage read_pgm(const fs::path& p) {
  const auto bytes = detail::read_file(p);
  std::istringstream is(bytes);
  require(detail::pnm_token(is) == "P5", Errc::format_error, "not a binary PGM (P5): " + p.string());
  GrayImage g;
  g.width = detail::pnm_number(is);
  g.height = detail::pnm_number(is);
  const auto maxval = detail::pnm_number(is);
  require(g.width > 0 && g.height > 0 && maxval > 0 && maxval <= 65535, Errc::format_error,
          "bad PGM header: " + p.string());
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  std::string body(g.width * g.height * bpp, '\0');
  is.read(body.data(), static_cast<std::streamsize>(body.size()));
  require(static_cast<std::size_t>(is.gcount()) == body.size(), Errc::format_error,
          "truncated PGM: " + p.string());
  g.values.resize(g.width * g.height);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const auto hi = static_cast<unsigned char>(body[i * bpp]);
    g.values[i] = bpp == 2 ? static_cast<double>((hi << 8) | static_cast<unsigned char>(body[2 * i + 1]))
                           : static_cast<double>(hi);
  }
  return g;
}

// ---------------------------------------------------------------------------
// PF32 planar float dump: "PF32", u32 width, u32 height, u32 planes, f64 dx,
// f64 dy, then planes of width*height little-endian float32.

inline std::string encode_pf32(std::size_t width, std::size_t height, double dx, double dy,
                               const std::vector<std::vector<double>>& planes) {
  std::ostringstream os;
  os.write("PF32", 4);
  detail::put_u32(os, static_cast<std::uint32_t>(width));
  detail::put_u32(os, static_cast<std::uint32_t>(height));
  detail::put_u32(os, static_cast<std::uint32_t>(planes.size()));
  std::uint64_t bx = 0, by = 0;
  std::memcpy(&bx, &dx, 8);
  std::memcpy(&by, &dy, 8);
  detail::put_u64(os, bx);
  detail::put_u64(os, by);
  for (const auto& p : planes) {
    require(p.size() == width * height, Errc::invalid_argument, "plane size mismatch");
    for (double v : p) {
      const auto f = static_cast<float>(v);
      std::uint32_t u = 0;
      std::memcpy(&u, &f, 4);
      detail::put_u32(os, u);
    }
  }
  return os.str();
}

inline void write_pf32(const fs::path& p, const FrequencyImage& img) {
  detail::write_file(p, encode_pf32(img.width, img.height, img.dnu_x, img.dnu_y, {img.values}));
}

inline void write_pf32(const fs::path& p, const ComplexField& f) {
  std::vector<double> re(f.data.size()), im(f.data.size());
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    re[i] = f.data[i].real();
    im[i] = f.data[i].imag();
  }
  const bool far = f.plane == Plane::far_field;
  detail::write_file(p, encode_pf32(f.grid.nx(), f.grid.ny(), far ? f.grid.dnu_x() : f.grid.dx(),
                                    far ? f.grid.dnu_y() : f.grid.dy(), {re, im}));
}

/// First plane of a PF32 file as a frequency image.
inline FrequencyImage read_pf32(const fs::path& p) {
  const auto bytes = detail::read_file(p);
  std::istringstream is(bytes);
  char magic[4] = {};
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, "PF32", 4) == 0, Errc::format_error,
          "not a PF32 file: " + p.string());
  const auto w = detail::get_u32(is);
  const auto h = detail::get_u32(is);
  const auto planes = detail::get_u32(is);
  const auto bx = detail::get_u64(is);
  const auto by = detail::get_u64(is);
  require(w > 0 && h > 0 && planes >= 1, Errc::format_error, "bad PF32 header: " + p.string());
  double dx = 0.0, dy = 0.0;
  std::memcpy(&dx, &bx, 8);
  std::memcpy(&dy, &by, 8);
  FrequencyImage img(w, h, dx, dy);
  for (auto& v : img.values) {
    const auto u = detail::get_u32(is);
    float f = 0.0f;
    std::memcpy(&f, &u, 4);
    v = f;
  }
  return img;
}

// ---------------------------------------------------------------------------
// CSV

/// Fixed-precision rendering so repeated runs emit identical bytes.
inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_csv(const fs::path& p, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  detail::write_file(p, os.str());
}

/// Two-line CSV (header + one row) as a key -> value map.
inline std::map<std::string, std::string> read_csv_row(const fs::path& p) {
  std::istringstream is(detail::read_file(p));
  std::string head, row;
  require(static_cast<bool>(std::getline(is, head)) && static_cast<bool>(std::getline(is, row)),
          Errc::format_error, "CSV needs a header and one row: " + p.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
  };
  const auto k = split(head), v = split(row);
  require(k.size() == v.size(), Errc::format_error, "CSV row width differs from header: " + p.string());
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < k.size(); ++i) out[k[i]] = v[i];
  return out;
}

}  // namespace qholo::io
