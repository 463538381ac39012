#pragma once

#include <string>
#include <vector>

#include "lfs/tensor.hpp"

namespace lfs::img {

// 8-bit RGB PNG <-> [3,H,W] tensor in [-1,1]. Writing rounds half away
// from zero.
Tensor load_png(const std::string& path);
void save_png(const Tensor& image, const std::string& path);

Tensor resize_bilinear(const Tensor& image, int size);
Tensor hflip(const Tensor& image);
// Horizontal strip of equally sized images.
Tensor hstack(const std::vector<Tensor>& images);

}  // namespace lfs::img
