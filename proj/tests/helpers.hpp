#pragma once

#include <random>
#include <sstream>
#include <string>

#include "gazemap/gaze_ingest.hpp"
#include "gazemap/mask_store.hpp"

namespace testutil {

// Filled axis-aligned rectangle [x0,x1] x [y0,y1] as an instance.
inline gazemap::Instance rect_instance(std::string id, std::string label, double score, int w, int h, int x0,
                                       int y0, int x1, int y1) {
  gazemap::Bitmap b(h, w);
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y) b.set(x, y);
  return gazemap::make_instance(std::move(id), std::move(label), score, gazemap::encode_rle(b));
}

inline gazemap::Bitmap random_bitmap(std::mt19937& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  gazemap::Bitmap b(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) b.set(x, y, on(rng));
  return b;
}

// Gapless 100 Hz gp log from t=0, all at (x, y).
inline std::string gp_log(int samples, double x = 0.5, double y = 0.5, std::int64_t t0 = 0) {
  std::ostringstream out;
  for (int i = 0; i < samples; ++i) {
    out << "{\"ts\":" << t0 + std::int64_t(i) * 10000 << ",\"type\":\"gp\",\"gp\":[" << x << "," << y
        << "],\"s\":0}\n";
  }
  return out.str();
}

}  // namespace testutil
