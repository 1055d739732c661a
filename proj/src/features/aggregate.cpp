#include "gbwm/features/features.hpp"

namespace gbwm {

// Offset where each block starts; the last block is open-ended.
static constexpr int kBlockStart[kStateBlocks + 1] = {0, 1, 2, 3, 4, 6, 10, -1};

std::array<double, kStateBlocks> aggregate(std::span<const double> v) {
  std::array<double, kStateBlocks> out{};
  const int n = static_cast<int>(v.size());
  int block = 0;
  for (int d = 0; d < n; ++d) {
    while (block + 1 < kStateBlocks && d >= kBlockStart[block + 1]) ++block;
    out[block] += v[d];
  }
  return out;
}

}  // namespace gbwm
