#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "matrix.hpp"

namespace wsvad {

// One video's embedding sequence: T temporal tokens by D embedding dims.
// The on-disk form (".ftbf") is a 16-byte header -- magic "FTBF", version,
// T, D as little-endian u32 -- followed by T*D little-endian float32 values
// in row-major order.
struct FeatureSequence {
  Matrix data;
  std::optional<double> frame_rate_hint;
};

inline constexpr uint32_t kFeatureFileVersion = 1;

// Throws Error(argument) if the sequence breaks its invariants:
// T >= 1, D >= 1, every element finite and representable as float32 storage.
void check_feature_invariants(const FeatureSequence& seq);

FeatureSequence decode_feature_file(const std::filesystem::path& path);

void encode_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);

// Mean-pools non-overlapping windows of snippet_len rows. A trailing partial
// window is padded by replicating the last row to full length before
// averaging, so every output row is a mean of exactly snippet_len rows.
FeatureSequence snippetize(const FeatureSequence& seq, std::size_t snippet_len);
Matrix snippetize_rows(const Matrix& rows, std::size_t snippet_len);

inline std::size_t snippet_count(std::size_t frames, std::size_t snippet_len) {
  return (frames + snippet_len - 1) / snippet_len;
}

}  // namespace wsvad
