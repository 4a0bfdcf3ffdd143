#include "punchdet/image_store.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "punchdet/error.hpp"

namespace punchdet {

void ImageSource::check_bounds(std::int64_t x, std::int64_t y, std::int64_t w,
                               std::int64_t h) const {
  if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > width() || y + h > height()) {
    std::ostringstream os;
    os << "crop (" << x << ", " << y << ", " << w << "x" << h << ") outside " << width()
       << "x" << height() << " image '" << image_id() << "'";
    throw Error(ErrorCode::out_of_bounds_frame, os.str());
  }
}

MemoryImage::MemoryImage(std::string image_id, PixelBuffer pixels, int source_channels)
    : id_(std::move(image_id)), pixels_(std::move(pixels)), source_channels_(source_channels) {
  if (pixels_.width < 1 || pixels_.height < 1 ||
      pixels_.rgb.size() != static_cast<std::size_t>(pixels_.width * pixels_.height * 3)) {
    throw Error(ErrorCode::invalid_argument, "pixel buffer size does not match dimensions");
  }
}

PixelBuffer MemoryImage::read_crop(std::int64_t x, std::int64_t y, std::int64_t w,
                                   std::int64_t h) const {
  check_bounds(x, y, w, h);
  PixelBuffer out(w, h);
  for (std::int64_t row = 0; row < h; ++row) {
    std::memcpy(out.pixel(0, row), pixels_.pixel(x, y + row), static_cast<std::size_t>(w * 3));
  }
  return out;
}

std::unique_ptr<ImageSource> open_image(const std::filesystem::path& path,
                                        std::string image_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open image " + path.string());
  std::array<unsigned char, 8> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  if (in.gcount() < 4) {
    throw Error(ErrorCode::unsupported_format, "file too short: " + path.string());
  }
  if (image_id.empty()) image_id = path.stem().string();

  static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() == 8 && magic == kPng) return open_png(path, std::move(image_id));
  const bool tiff_le = magic[0] == 'I' && magic[1] == 'I' && (magic[2] == 42 || magic[2] == 43);
  const bool tiff_be = magic[0] == 'M' && magic[1] == 'M' && (magic[3] == 42 || magic[3] == 43);
  if (tiff_le || tiff_be) return open_tiff(path, std::move(image_id));
  throw Error(ErrorCode::unsupported_format, "not a PNG or TIFF file: " + path.string());
}

}  // namespace punchdet
