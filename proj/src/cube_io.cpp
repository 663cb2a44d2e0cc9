#include "hsfuse/cube_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace hsfuse {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'U', 'B'};

std::uint32_t read_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::uint8_t to_byte(double v) {
  double s = std::round(v);
  if (s < 0.0) s = 0.0;
  if (s > 255.0) s = 255.0;
  return static_cast<std::uint8_t>(s);
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

GrayImage read_png_gray(const std::string& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.c_str(), "rb");
  if (!c.fp) throw std::runtime_error("cannot open PNG file: " + path);
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (setjmp(png_jmpbuf(c.png))) throw std::runtime_error("malformed PNG: " + path);
  png_init_io(c.png, c.fp);
  png_read_info(c.png, c.info);
  png_set_expand(c.png);
  png_set_strip_16(c.png);
  png_set_strip_alpha(c.png);
  const int color = png_get_color_type(c.png, c.info);
  if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(c.png, 1, -1.0, -1.0);
  png_read_update_info(c.png, c.info);
  const int h = static_cast<int>(png_get_image_height(c.png, c.info));
  const int w = static_cast<int>(png_get_image_width(c.png, c.info));
  std::vector<std::uint8_t> row(png_get_rowbytes(c.png, c.info));
  GrayImage img(h, w);
  for (int i = 0; i < h; ++i) {
    png_read_row(c.png, row.data(), nullptr);
    for (int j = 0; j < w; ++j) img(i, j) = row[j] / 255.0;
  }
  return img;
}

void write_png(const std::string& path, int h, int w, int channels,
               const std::vector<std::uint8_t>& pixels) {
  PngWriteCloser c;
  c.fp = std::fopen(path.c_str(), "wb");
  if (!c.fp) throw std::runtime_error("cannot create PNG file: " + path);
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (setjmp(png_jmpbuf(c.png))) throw std::runtime_error("PNG write failed: " + path);
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  for (int i = 0; i < h; ++i)
    png_write_row(c.png, const_cast<png_bytep>(pixels.data() +
                                               static_cast<std::size_t>(i) * w * channels));
  png_write_end(c.png, nullptr);
}

void skip_pnm_whitespace(std::istream& in) {
  int ch;
  while ((ch = in.peek()) != EOF) {
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("unsupported PNM type in " + path);
  skip_pnm_whitespace(in);
  int w, h, maxval;
  in >> w;
  skip_pnm_whitespace(in);
  in >> h;
  skip_pnm_whitespace(in);
  in >> maxval;
  in.get();  // single whitespace before payload
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("bad PGM header in " + path);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw std::runtime_error("truncated PGM payload in " + path);
  GrayImage img(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      img(i, j) = buf[static_cast<std::size_t>(i) * w + j] / static_cast<double>(maxval);
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create image: " + path);
  out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
  for (int i = 0; i < img.rows; ++i)
    for (int j = 0; j < img.cols; ++j) {
      const std::uint8_t b = to_byte(img(i, j) * 255.0);
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
}

}  // namespace

SpectralCube read_cube(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cube file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("malformed cube header (bad magic): " + path);
  const std::uint32_t m = read_u32le(in);
  const std::uint32_t n = read_u32le(in);
  const std::uint32_t l = read_u32le(in);
  if (!in || m == 0 || n == 0 || l == 0)
    throw std::runtime_error("malformed cube header (zero dimension): " + path);
  SpectralCube cube(static_cast<int>(m), static_cast<int>(n), static_cast<int>(l));
  std::vector<float> payload(cube.size());
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(payload.size() * sizeof(float)))
    throw std::runtime_error("cube payload does not match header dimensions: " + path);
  double maxval = 0.0;
  for (Eigen::Index k = 0; k < cube.size(); ++k) {
    const double v = payload[static_cast<std::size_t>(k)];
    if (!std::isfinite(v)) throw std::runtime_error("non-finite value in cube: " + path);
    cube.data[k] = v;
    maxval = std::max(maxval, std::abs(v));
  }
  if (maxval > 1.0) cube.data /= maxval;
  return cube;
}

void write_cube(const SpectralCube& cube, const std::string& path) {
  require(cube.rows > 0 && cube.cols > 0 && cube.bands > 0, "empty cube");
  if (!cube.data.allFinite()) throw std::runtime_error("refusing to write non-finite cube");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create cube file: " + path);
  out.write(kMagic, 4);
  write_u32le(out, static_cast<std::uint32_t>(cube.rows));
  write_u32le(out, static_cast<std::uint32_t>(cube.cols));
  write_u32le(out, static_cast<std::uint32_t>(cube.bands));
  std::vector<float> payload(cube.size());
  for (Eigen::Index k = 0; k < cube.size(); ++k)
    payload[static_cast<std::size_t>(k)] = static_cast<float>(cube.data[k]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write on cube file: " + path);
}

ShotStack read_shots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open measurement file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SSTK", 4) != 0)
    throw std::runtime_error("malformed measurement header (bad magic): " + path);
  const std::uint32_t m = read_u32le(in);
  const std::uint32_t n = read_u32le(in);
  const std::uint32_t w = read_u32le(in);
  if (!in || m == 0 || n == 0 || w == 0)
    throw std::runtime_error("malformed measurement header (zero dimension): " + path);
  ShotStack shots(static_cast<int>(m), static_cast<int>(n), static_cast<int>(w));
  in.read(reinterpret_cast<char*>(shots.data.data()),
          static_cast<std::streamsize>(shots.data.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(shots.data.size() * sizeof(double)))
    throw std::runtime_error("measurement payload does not match header: " + path);
  if (!shots.data.allFinite())
    throw std::runtime_error("non-finite value in measurements: " + path);
  return shots;
}

void write_shots(const ShotStack& shots, const std::string& path) {
  require(shots.rows > 0 && shots.cols > 0 && shots.shots > 0, "empty shot stack");
  if (!shots.data.allFinite())
    throw std::runtime_error("refusing to write non-finite measurements");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create measurement file: " + path);
  out.write("SSTK", 4);
  write_u32le(out, static_cast<std::uint32_t>(shots.rows));
  write_u32le(out, static_cast<std::uint32_t>(shots.cols));
  write_u32le(out, static_cast<std::uint32_t>(shots.shots));
  out.write(reinterpret_cast<const char*>(shots.data.data()),
            static_cast<std::streamsize>(shots.data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write on measurement file: " + path);
}

GrayImage read_gray_image(const std::string& path) {
  if (has_suffix(path, ".png")) return read_png_gray(path);
  return read_pgm(path);
}

void write_gray_image(const GrayImage& img, const std::string& path) {
  if (has_suffix(path, ".png")) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(img.rows) * img.cols);
    for (int i = 0; i < img.rows; ++i)
      for (int j = 0; j < img.cols; ++j)
        pixels[static_cast<std::size_t>(i) * img.cols + j] = to_byte(img(i, j) * 255.0);
    write_png(path, img.rows, img.cols, 1, pixels);
    return;
  }
  write_pgm(img, path);
}

void write_rgb_image(const GrayImage& r, const GrayImage& g, const GrayImage& b,
                     const std::string& path) {
  require(r.rows == g.rows && g.rows == b.rows && r.cols == g.cols && g.cols == b.cols,
          "RGB channel dimensions differ");
  const int h = r.rows, w = r.cols;
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(h) * w * 3);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const std::size_t k = (static_cast<std::size_t>(i) * w + j) * 3;
      pixels[k + 0] = to_byte(r(i, j) * 255.0);
      pixels[k + 1] = to_byte(g(i, j) * 255.0);
      pixels[k + 2] = to_byte(b(i, j) * 255.0);
    }
  if (has_suffix(path, ".png")) {
    write_png(path, h, w, 3, pixels);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create image: " + path);
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

}  // namespace hsfuse
