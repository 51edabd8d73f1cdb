#include "ftb.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace wsvad {

Matrix temporal_shift(const Matrix& features) {
  const std::size_t t = features.rows();
  const std::size_t d = features.cols();
  Matrix out(t, d);
  for (std::size_t c = 0; c < d; ++c) out(0, c) = features(0, c);
  for (std::size_t r = 1; r < t; ++r) {
    for (std::size_t c = 0; c < d; ++c) out(r, c) = features(r - 1, c);
  }
  return out;
}

Matrix temporal_regularity(const Matrix& features) {
  const std::size_t t = features.rows();
  const std::size_t d = features.cols();
  Matrix out(t, d);
  // Row 0 stays zero: the replicate pad makes the first difference vanish.
  for (std::size_t r = 1; r < t; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      out(r, c) = std::abs(features(r, c) - features(r - 1, c));
    }
  }
  return out;
}

Matrix dct_temporal(const Matrix& features) {
  const std::size_t t = features.rows();
  const std::size_t d = features.cols();

  // T x T basis table, basis[k][n] already carries the orthonormal scale.
  const double scale = std::sqrt(2.0 / static_cast<double>(t));
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  std::vector<double> basis(t * t);
  for (std::size_t k = 0; k < t; ++k) {
    const double ck = (k == 0) ? inv_sqrt2 : 1.0;
    for (std::size_t n = 0; n < t; ++n) {
      const double angle = std::numbers::pi * (2.0 * static_cast<double>(n) + 1.0) *
                           static_cast<double>(k) / (2.0 * static_cast<double>(t));
      basis[k * t + n] = scale * ck * std::cos(angle);
    }
  }

  Matrix out(t, d);
  for (std::size_t k = 0; k < t; ++k) {
    const double* row = basis.data() + k * t;
    for (std::size_t n = 0; n < t; ++n) {
      const double w = row[n];
      for (std::size_t c = 0; c < d; ++c) {
        out(k, c) += w * features(n, c);
      }
    }
  }
  return out;
}

Matrix apply_ftb_rows(const Matrix& rows, FtbMode mode, const FtbOptions& options) {
  switch (mode) {
    case FtbMode::m1:
      return rows;
    case FtbMode::m2: {
      Matrix delta = temporal_regularity(rows);
      Matrix coeffs = dct_temporal(delta);
      const std::size_t cutoff = options.dct_lowpass_cutoff;
      Matrix out(rows.rows(), rows.cols());
      for (std::size_t r = 0; r < rows.rows(); ++r) {
        const bool keep = cutoff == 0 || r < cutoff;
        for (std::size_t c = 0; c < rows.cols(); ++c) {
          out(r, c) = delta(r, c) + (keep ? coeffs(r, c) : 0.0);
        }
      }
      return out;
    }
    case FtbMode::m3: {
      Matrix delta = temporal_regularity(rows);
      Matrix out(rows.rows(), rows.cols());
      for (std::size_t r = 0; r < rows.rows(); ++r) {
        for (std::size_t c = 0; c < rows.cols(); ++c) {
          out(r, c) = delta(r, c) + sigmoid(rows(r, c));
        }
      }
      return out;
    }
  }
  fail(ErrorCode::internal, "unreachable ftb mode");
}

TransformedFeature apply_ftb(const FeatureSequence& seq, FtbMode mode,
                             const FtbOptions& options) {
  check_feature_invariants(seq);
  return {apply_ftb_rows(seq.data, mode, options), mode};
}

FtbMode ftb_mode_from_string(const std::string& text) {
  if (text == "m1" || text == "M1") return FtbMode::m1;
  if (text == "m2" || text == "M2") return FtbMode::m2;
  if (text == "m3" || text == "M3") return FtbMode::m3;
  fail(ErrorCode::argument, "unknown ftb mode: " + text + " (expected m1, m2, or m3)");
}

std::string to_string(FtbMode mode) {
  switch (mode) {
    case FtbMode::m1: return "m1";
    case FtbMode::m2: return "m2";
    case FtbMode::m3: return "m3";
  }
  return "m1";
}

}  // namespace wsvad
