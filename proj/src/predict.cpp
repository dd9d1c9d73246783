#include "astro/predict.hpp"

#include <stdexcept>
#include <string>

#include "astro/threads.hpp"

namespace astro {

Image reflect_pad(const Image& img, int pad) {
  if (pad < 0) throw std::invalid_argument("padding must be nonnegative");
  if (pad >= img.height || pad >= img.width) {
    throw std::invalid_argument("image " + std::to_string(img.height) + "x" +
                                std::to_string(img.width) + " too small to mirror-pad by " +
                                std::to_string(pad));
  }
  auto reflect = [](int t, int n) { return t < 0 ? -t : (t >= n ? 2 * n - 2 - t : t); };
  Image out(img.height + 2 * pad, img.width + 2 * pad);
  for (int r = 0; r < out.height; ++r) {
    const int sr = reflect(r - pad, img.height);
    for (int c = 0; c < out.width; ++c) {
      out.at(r, c) = img.at(sr, reflect(c - pad, img.width));
    }
  }
  return out;
}

namespace {

// Aligned tile starts plus a final start anchored so the last tile ends at
// `total` exactly.
std::vector<int> tile_starts(int total, int window) {
  std::vector<int> starts;
  for (int t = 0;; t += window) {
    if (t + window >= total) {
      starts.push_back(total - window);
      break;
    }
    starts.push_back(t);
  }
  return starts;
}

}  // namespace

Image predict_image(const CnnModel& model, const Image& degraded) {
  const int rf = model.receptive_field();
  if (rf % 2 == 0) {
    throw std::invalid_argument("tiled prediction requires an odd receptive field");
  }
  const int pad = (rf - 1) / 2;
  const int win_in = model.input_window;
  const int win_out = win_in - rf + 1;
  if (win_out < 1) throw std::invalid_argument("model input window smaller than receptive field");
  if (degraded.height < win_out || degraded.width < win_out || degraded.height <= pad ||
      degraded.width <= pad) {
    throw std::invalid_argument("image " + std::to_string(degraded.height) + "x" +
                                std::to_string(degraded.width) +
                                " smaller than one prediction window after padding");
  }

  const Image padded = reflect_pad(degraded, pad);
  const CnnEngine<float> engine(model);

  const auto rows = tile_starts(degraded.height, win_out);
  const auto cols = tile_starts(degraded.width, win_out);
  Image out(degraded.height, degraded.width);

  const int64_t n_tiles = static_cast<int64_t>(rows.size()) * cols.size();
  parallel_for(n_tiles, [&](int64_t t) {
    const size_t ri = static_cast<size_t>(t) / cols.size();
    const size_t ci = static_cast<size_t>(t) % cols.size();
    const int tr = rows[ri], tc = cols[ci];
    Image window = extract_patch(padded, tr, tc, win_in, win_in);
    Image tile = engine.infer(window);
    // each tile writes only up to its successor's start; overlapping tiles
    // agree bitwise, this just keeps the writes disjoint
    const int rend = ri + 1 < rows.size() ? std::min(rows[ri + 1], tr + win_out) : tr + win_out;
    const int cend = ci + 1 < cols.size() ? std::min(cols[ci + 1], tc + win_out) : tc + win_out;
    for (int r = tr; r < rend; ++r) {
      for (int c = tc; c < cend; ++c) {
        out.at(r, c) = tile.at(r - tr, c - tc);
      }
    }
  });
  return out;
}

std::vector<Image> extract_feature_maps(const CnnModel& model, const Image& input, int layer) {
  if (layer < 1 || layer > static_cast<int>(model.layers.size())) {
    throw std::invalid_argument("layer index " + std::to_string(layer) + " out of range [1, " +
                                std::to_string(model.layers.size()) + "]");
  }
  ForwardResult res = forward(model, input, true);
  return std::move(res.feature_maps[static_cast<size_t>(layer) - 1]);
}

}  // namespace astro
