#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rgi/tensor.hpp"

namespace rgi {

// Binary netpbm images, maxval 255. Pixel convention everywhere else is
// [-1, 1]; the mapping is byte = round((v + 1) / 2 * 255) clamped.
struct PnmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;  // 1 = P5, 3 = P6
    std::vector<std::uint8_t> bytes;  // row-major, interleaved channels
};

PnmImage read_pnm(const std::filesystem::path& path);
void write_pnm(const PnmImage& img, const std::filesystem::path& path);

// [-1,1] image tensor ({m,n} or {m,n,3}) <-> bytes
PnmImage image_to_pnm(const Tensor& image);
Tensor pnm_to_image(const PnmImage& img);

// binary mask ({m,n}, values 0/1) <-> bytes (0 / 255)
PnmImage mask_to_pnm(const Tensor& mask);
Tensor pnm_to_mask(const PnmImage& img);  // byte >= 128 -> 1

void write_image_pnm(const Tensor& image, const std::filesystem::path& path);
void write_mask_pgm(const Tensor& mask, const std::filesystem::path& path);

}  // namespace rgi
