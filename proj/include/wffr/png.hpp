// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 wffr contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wffr/types.hpp"

namespace wffr {

/// RGB8 image, row-major, pixels.size() == 3*width*height.
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& pixels);

/// Renders a T x S grid as a heatmap with time on the x axis and site on the
/// y axis (image is S rows by T columns), min..max mapped through a fixed
/// colormap. Constant grids render as a flat mid-scale image.
void write_grid_png(const std::string& path, const MatrixXd& grid_t_by_s);

}  // namespace wffr
