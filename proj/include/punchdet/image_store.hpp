#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace punchdet {

/// Interleaved 8-bit RGB pixels, row-major.
struct PixelBuffer {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> rgb;

  PixelBuffer() = default;
  PixelBuffer(std::int64_t w, std::int64_t h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w * h * 3), fill) {}

  static constexpr int channels = 3;

  std::uint8_t* pixel(std::int64_t x, std::int64_t y) {
    return rgb.data() + (y * width + x) * 3;
  }
  const std::uint8_t* pixel(std::int64_t x, std::int64_t y) const {
    return rgb.data() + (y * width + x) * 3;
  }

  friend bool operator==(const PixelBuffer&, const PixelBuffer&) = default;
};

// Random-access reader over a (possibly huge) raster. Implementations are
// safe for concurrent read_crop calls; reads never change observable state.
class ImageSource {
 public:
  virtual ~ImageSource() = default;

  virtual const std::string& image_id() const noexcept = 0;
  virtual std::int64_t width() const noexcept = 0;
  virtual std::int64_t height() const noexcept = 0;
  /// Channels stored in the file. Crops are always expanded to RGB.
  virtual int source_channels() const noexcept = 0;

  /// Exactly w*h RGB pixels starting at (x, y). Throws Error(out_of_bounds_frame)
  /// unless the rectangle lies fully inside the image.
  virtual PixelBuffer read_crop(std::int64_t x, std::int64_t y, std::int64_t w,
                                std::int64_t h) const = 0;

 protected:
  void check_bounds(std::int64_t x, std::int64_t y, std::int64_t w, std::int64_t h) const;
};

/// In-memory image, used for fully decoded formats and in tests.
class MemoryImage final : public ImageSource {
 public:
  MemoryImage(std::string image_id, PixelBuffer pixels, int source_channels = 3);

  const std::string& image_id() const noexcept override { return id_; }
  std::int64_t width() const noexcept override { return pixels_.width; }
  std::int64_t height() const noexcept override { return pixels_.height; }
  int source_channels() const noexcept override { return source_channels_; }
  PixelBuffer read_crop(std::int64_t x, std::int64_t y, std::int64_t w,
                        std::int64_t h) const override;

  const PixelBuffer& pixels() const noexcept { return pixels_; }

 private:
  std::string id_;
  PixelBuffer pixels_;
  int source_channels_;
};

/// Opens a PNG (fully decoded) or TIFF (read lazily, tile or strip at a time).
/// The image id defaults to the file stem. Throws Error(io_failure) when the file
/// cannot be read and Error(unsupported_format) for anything else.
std::unique_ptr<ImageSource> open_image(const std::filesystem::path& path,
                                        std::string image_id = {});

std::unique_ptr<ImageSource> open_png(const std::filesystem::path& path, std::string image_id);
std::unique_ptr<ImageSource> open_tiff(const std::filesystem::path& path, std::string image_id);

/// Encodes an RGB buffer as an 8-bit PNG.
void write_png(const std::filesystem::path& path, const PixelBuffer& pixels);

/// Encodes an RGB buffer as an 8-bit TIFF. tile_side > 0 writes a tiled TIFF,
/// otherwise strips of rows_per_strip rows.
void write_tiff(const std::filesystem::path& path, const PixelBuffer& pixels,
                std::uint32_t tile_side = 0, std::uint32_t rows_per_strip = 16);

}  // namespace punchdet
