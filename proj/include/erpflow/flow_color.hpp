#pragma once

// Color-wheel rendering of a flow field: hue encodes direction, saturation
// encodes magnitude. Zero flow renders white.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "erpflow/flow_field.hpp"

namespace erpflow {

namespace detail {

inline void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  // h in [0, 1)
  const double hh = h * 6.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}

}  // namespace detail

// When max_mag is not given, the 99th percentile of the magnitudes is used.
template <class T>
ErpImage<T> flow_to_color(const FlowField<T>& flow, std::optional<double> max_mag = std::nullopt) {
  const ErpGrid g = flow.grid;
  double norm = max_mag.value_or(0.0);
  if (!max_mag) {
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(g.pixel_count()));
    for (int j = 0; j < g.height; ++j)
      for (int i = 0; i < g.width; ++i)
        mags.push_back(std::hypot(double(flow.u(j, i)), double(flow.v(j, i))));
    const std::size_t k = static_cast<std::size_t>(0.99 * double(mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + k, mags.end());
    norm = mags[k];
  }
  if (norm <= 0.0) norm = 1.0;

  ErpImage<T> img(g, 3, flow.view);
  for (int j = 0; j < g.height; ++j) {
    for (int i = 0; i < g.width; ++i) {
      const double u = double(flow.u(j, i)), v = double(flow.v(j, i));
      double hue = std::atan2(v, u) / (2.0 * kPi);
      if (hue < 0.0) hue += 1.0;
      if (hue >= 1.0) hue = 0.0;
      const double sat = std::min(1.0, std::hypot(u, v) / norm);
      double rgb[3];
      detail::hsv_to_rgb(hue, sat, 1.0, rgb);
      for (int c = 0; c < 3; ++c) img.planes[c](j, i) = static_cast<T>(rgb[c]);
    }
  }
  return img;
}

}  // namespace erpflow
