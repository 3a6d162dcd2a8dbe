#pragma once

// Middlebury .flo flow files (bit-exact round trip) and PFM float images.

#include <string>

#include "erpflow/flow_field.hpp"
#include "erpflow/sphere_geom.hpp"

namespace erpflow {

// .flo layout: float magic 202021.25 ("PIEH"), int32 width, int32 height,
// then interleaved (u, v) float32 pairs row-major; all little-endian.
FlowField<float> read_flo(const std::string& path);
void write_flo(const std::string& path, const FlowField<float>& flow);

ErpImage<float> read_pfm(const std::string& path);
void write_pfm(const std::string& path, const ErpImage<float>& img);

}  // namespace erpflow
