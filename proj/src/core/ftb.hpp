#pragma once

#include <string>

#include "features.hpp"
#include "matrix.hpp"

namespace wsvad {

// Feature transformation block. Three selectable transforms of a raw
// embedding sequence, all shape-preserving:
//   m1  identity (spatial feature passthrough)
//   m2  temporal regularity plus its per-channel temporal DCT, added
//       elementwise
//   m3  temporal regularity plus the sigmoid-activated input, added
//       elementwise
enum class FtbMode { m1, m2, m3 };

struct TransformedFeature {
  Matrix data;
  FtbMode mode = FtbMode::m1;
};

struct FtbOptions {
  // 0 keeps every DCT coefficient. A positive cutoff zeroes coefficients
  // with frequency index >= cutoff before the elementwise add. Experimental,
  // off by default.
  std::size_t dct_lowpass_cutoff = 0;
};

// Backward shift along time: row t takes row t-1; row 0 is replicated from
// the input's first row and the final input row falls off the end.
Matrix temporal_shift(const Matrix& features);

// |F - temporal_shift(F)| elementwise; row 0 is always zero.
Matrix temporal_regularity(const Matrix& features);

// Orthonormal DCT-II along the temporal axis, each embedding channel
// independently:
//   X[k] = sqrt(2/T) * c_k * sum_t x[t] * cos(pi * (2t+1) * k / (2T)),
// with c_0 = 1/sqrt(2) and c_k = 1 otherwise.
Matrix dct_temporal(const Matrix& features);

TransformedFeature apply_ftb(const FeatureSequence& seq, FtbMode mode,
                             const FtbOptions& options = {});
Matrix apply_ftb_rows(const Matrix& rows, FtbMode mode, const FtbOptions& options = {});

FtbMode ftb_mode_from_string(const std::string& text);
std::string to_string(FtbMode mode);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace wsvad
