#include <png.h>

#include <cstring>

#include "punchdet/error.hpp"
#include "punchdet/image_store.hpp"

namespace punchdet {

namespace {

int channels_of(png_uint_32 format) {
  if (format & PNG_FORMAT_FLAG_COLORMAP) return 3;
  int n = (format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  if (format & PNG_FORMAT_FLAG_ALPHA) ++n;
  return n;
}

}  // namespace

std::unique_ptr<ImageSource> open_png(const std::filesystem::path& path, std::string image_id) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::unsupported_format, "cannot decode PNG " + path.string() + ": " + why);
  }
  const int stored = channels_of(image.format);
  // Gray expands to RGB; alpha is composited over black by libpng.
  image.format = PNG_FORMAT_RGB;
  PixelBuffer pixels(image.width, image.height);
  if (!png_image_finish_read(&image, nullptr, pixels.rgb.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::io_failure, "cannot read PNG " + path.string() + ": " + why);
  }
  return std::make_unique<MemoryImage>(std::move(image_id), std::move(pixels), stored);
}

void write_png(const std::filesystem::path& path, const PixelBuffer& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(pixels.width);
  image.height = static_cast<png_uint_32>(pixels.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.rgb.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::io_failure, "cannot write PNG " + path.string() + ": " + why);
  }
}

}  // namespace punchdet
