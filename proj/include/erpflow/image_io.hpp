#pragma once

// 8-bit PNG input/output for panorama images (values in [0, 1]).

#include <string>

#include "erpflow/sphere_geom.hpp"

namespace erpflow {

ErpImage<float> read_png(const std::string& path);
void write_png(const std::string& path, const ErpImage<float>& img);

// Dispatch on extension: .png or .pfm.
ErpImage<float> read_image(const std::string& path);
void write_image(const std::string& path, const ErpImage<float>& img);

}  // namespace erpflow
