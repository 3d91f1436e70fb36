#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stereoranger {

/// 8-bit grayscale raster. Pixel (x, y) has its center at continuous
/// coordinates (x, y); the frame spans [0, width-1] x [0, height-1].
class Image8 {
public:
    Image8() = default;
    Image8(int width, int height, std::uint8_t fill = 0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    /// Bilinear sample at continuous (x, y); caller guarantees
    /// 0 <= x <= width-1 and 0 <= y <= height-1.
    double sample(double x, double y) const;

    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }
    std::vector<std::uint8_t>& pixels() noexcept { return pixels_; }

    bool operator==(const Image8& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Binary 8-bit portable graymap (P5, maxval 255).
void save_pgm(const Image8& img, const std::string& path);
Image8 load_pgm(const std::string& path);

}  // namespace stereoranger
