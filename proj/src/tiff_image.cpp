#include <tiffio.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <vector>

#include "punchdet/error.hpp"
#include "punchdet/image_store.hpp"

namespace punchdet {

namespace {

struct TiffCloser {
  void operator()(TIFF* t) const noexcept {
    if (t != nullptr) TIFFClose(t);
  }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

void quiet_libtiff() {
  static std::once_flag once;
  std::call_once(once, [] {
    TIFFSetWarningHandler(nullptr);
    TIFFSetErrorHandler(nullptr);
  });
}

// Decodes on demand. libtiff handles are not reentrant, so every decode
// holds mutex_; the decoded bytes never outlive the call.
class TiffImage final : public ImageSource {
 public:
  TiffImage(std::string image_id, TiffHandle tif, const std::filesystem::path& path)
      : id_(std::move(image_id)), tif_(std::move(tif)) {
    std::uint32_t w = 0, h = 0;
    std::uint16_t bits = 8, spp = 1, planar = PLANARCONFIG_CONTIG, photometric = 0;
    TIFFGetField(tif_.get(), TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif_.get(), TIFFTAG_IMAGELENGTH, &h);
    TIFFGetFieldDefaulted(tif_.get(), TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif_.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif_.get(), TIFFTAG_PLANARCONFIG, &planar);
    if (!TIFFGetField(tif_.get(), TIFFTAG_PHOTOMETRIC, &photometric)) {
      photometric = spp >= 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK;
    }
    const std::string name = path.string();
    if (w < 1 || h < 1) throw Error(ErrorCode::unsupported_format, "empty TIFF " + name);
    if (bits != 8) {
      throw Error(ErrorCode::unsupported_format, "only 8-bit TIFF is supported: " + name);
    }
    if (planar != PLANARCONFIG_CONTIG) {
      throw Error(ErrorCode::unsupported_format, "planar TIFF not supported: " + name);
    }
    const bool gray = (spp == 1 || spp == 2) && (photometric == PHOTOMETRIC_MINISBLACK ||
                                                 photometric == PHOTOMETRIC_MINISWHITE);
    const bool rgb = (spp == 3 || spp == 4) && photometric == PHOTOMETRIC_RGB;
    if (!gray && !rgb) {
      throw Error(ErrorCode::unsupported_format, "unsupported TIFF photometric layout: " + name);
    }
    width_ = w;
    height_ = h;
    spp_ = spp;
    invert_ = photometric == PHOTOMETRIC_MINISWHITE;
    tiled_ = TIFFIsTiled(tif_.get()) != 0;
    if (tiled_) {
      std::uint32_t tw = 0, th = 0;
      TIFFGetField(tif_.get(), TIFFTAG_TILEWIDTH, &tw);
      TIFFGetField(tif_.get(), TIFFTAG_TILELENGTH, &th);
      block_w_ = tw;
      block_h_ = th;
    } else {
      std::uint32_t rows = 0;
      TIFFGetFieldDefaulted(tif_.get(), TIFFTAG_ROWSPERSTRIP, &rows);
      block_w_ = width_;
      block_h_ = std::min<std::int64_t>(rows == 0 ? height_ : rows, height_);
    }
    if (block_w_ < 1 || block_h_ < 1) {
      throw Error(ErrorCode::unsupported_format, "bad TIFF block layout: " + name);
    }
  }

  const std::string& image_id() const noexcept override { return id_; }
  std::int64_t width() const noexcept override { return width_; }
  std::int64_t height() const noexcept override { return height_; }
  int source_channels() const noexcept override { return spp_; }

  PixelBuffer read_crop(std::int64_t x, std::int64_t y, std::int64_t w,
                        std::int64_t h) const override {
    check_bounds(x, y, w, h);
    PixelBuffer out(w, h);
    std::vector<std::uint8_t> block(static_cast<std::size_t>(block_w_ * block_h_ * spp_));

    std::lock_guard lock(mutex_);
    for (std::int64_t by = (y / block_h_) * block_h_; by < y + h; by += block_h_) {
      for (std::int64_t bx = (x / block_w_) * block_w_; bx < x + w; bx += block_w_) {
        decode_block(bx, by, block);
        const std::int64_t x0 = std::max(x, bx), x1 = std::min(x + w, bx + block_w_);
        const std::int64_t y0 = std::max(y, by), y1 = std::min(y + h, by + block_h_);
        for (std::int64_t row = y0; row < y1; ++row) {
          const std::uint8_t* src =
              block.data() + ((row - by) * block_w_ + (x0 - bx)) * spp_;
          std::uint8_t* dst = out.pixel(x0 - x, row - y);
          for (std::int64_t col = x0; col < x1; ++col, src += spp_, dst += 3) {
            if (spp_ >= 3) {
              dst[0] = src[0];
              dst[1] = src[1];
              dst[2] = src[2];
            } else {
              const std::uint8_t v = invert_ ? static_cast<std::uint8_t>(255 - src[0]) : src[0];
              dst[0] = dst[1] = dst[2] = v;
            }
          }
        }
      }
    }
    return out;
  }

 private:
  void decode_block(std::int64_t bx, std::int64_t by, std::vector<std::uint8_t>& block) const {
    tmsize_t got = -1;
    if (tiled_) {
      const ttile_t index = TIFFComputeTile(tif_.get(), static_cast<std::uint32_t>(bx),
                                            static_cast<std::uint32_t>(by), 0, 0);
      got = TIFFReadEncodedTile(tif_.get(), index, block.data(),
                                static_cast<tmsize_t>(block.size()));
    } else {
      const tstrip_t index = TIFFComputeStrip(tif_.get(), static_cast<std::uint32_t>(by), 0);
      got = TIFFReadEncodedStrip(tif_.get(), index, block.data(),
                                 static_cast<tmsize_t>(block.size()));
    }
    if (got < 0) {
      throw Error(ErrorCode::io_failure, "failed to decode TIFF block of '" + id_ + "'");
    }
  }

  std::string id_;
  TiffHandle tif_;
  std::int64_t width_ = 0, height_ = 0;
  std::int64_t block_w_ = 0, block_h_ = 0;
  int spp_ = 3;
  bool tiled_ = false;
  bool invert_ = false;
  mutable std::mutex mutex_;
};

}  // namespace

std::unique_ptr<ImageSource> open_tiff(const std::filesystem::path& path, std::string image_id) {
  quiet_libtiff();
  TiffHandle tif(TIFFOpen(path.c_str(), "r"));
  if (!tif) throw Error(ErrorCode::io_failure, "cannot open TIFF " + path.string());
  return std::make_unique<TiffImage>(std::move(image_id), std::move(tif), path);
}

void write_tiff(const std::filesystem::path& path, const PixelBuffer& pixels,
                std::uint32_t tile_side, std::uint32_t rows_per_strip) {
  quiet_libtiff();
  TiffHandle tif(TIFFOpen(path.c_str(), "w"));
  if (!tif) throw Error(ErrorCode::io_failure, "cannot create TIFF " + path.string());
  TIFF* t = tif.get();
  const auto w = static_cast<std::uint32_t>(pixels.width);
  const auto h = static_cast<std::uint32_t>(pixels.height);
  TIFFSetField(t, TIFFTAG_IMAGEWIDTH, w);
  TIFFSetField(t, TIFFTAG_IMAGELENGTH, h);
  TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, 3);
  TIFFSetField(t, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_RGB);
  TIFFSetField(t, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(t, TIFFTAG_COMPRESSION, COMPRESSION_DEFLATE);

  bool ok = true;
  if (tile_side > 0) {
    TIFFSetField(t, TIFFTAG_TILEWIDTH, tile_side);
    TIFFSetField(t, TIFFTAG_TILELENGTH, tile_side);
    std::vector<std::uint8_t> tile(static_cast<std::size_t>(tile_side) * tile_side * 3);
    for (std::uint32_t ty = 0; ty < h && ok; ty += tile_side) {
      for (std::uint32_t tx = 0; tx < w && ok; tx += tile_side) {
        std::fill(tile.begin(), tile.end(), 0);
        for (std::uint32_t row = 0; row < tile_side && ty + row < h; ++row) {
          const std::uint32_t n = std::min(tile_side, w - tx);
          std::memcpy(tile.data() + static_cast<std::size_t>(row) * tile_side * 3,
                      pixels.pixel(tx, ty + row), static_cast<std::size_t>(n) * 3);
        }
        ok = TIFFWriteTile(t, tile.data(), tx, ty, 0, 0) >= 0;
      }
    }
  } else {
    TIFFSetField(t, TIFFTAG_ROWSPERSTRIP, std::max<std::uint32_t>(rows_per_strip, 1));
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (std::uint32_t y = 0; y < h && ok; ++y) {
      std::memcpy(row.data(), pixels.pixel(0, y), row.size());
      ok = TIFFWriteScanline(t, row.data(), y, 0) >= 0;
    }
  }
  if (!ok) throw Error(ErrorCode::io_failure, "failed writing TIFF " + path.string());
}

}  // namespace punchdet
