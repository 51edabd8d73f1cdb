#include "features.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "error.hpp"

namespace wsvad {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'B', 'F'};

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

}  // namespace

void check_feature_invariants(const FeatureSequence& seq) {
  if (seq.data.rows() == 0 || seq.data.cols() == 0) {
    fail(ErrorCode::argument, "feature sequence must have T >= 1 and D >= 1");
  }
  if (!seq.data.all_finite()) {
    fail(ErrorCode::argument, "feature sequence contains non-finite values");
  }
  if (seq.frame_rate_hint && *seq.frame_rate_hint <= 0.0) {
    fail(ErrorCode::argument, "frame_rate_hint must be positive");
  }
}

FeatureSequence decode_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::io, "cannot open feature file: " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    fail(ErrorCode::io, "read failure on feature file: " + path.string());
  }
  if (bytes.size() < 16) {
    fail(ErrorCode::format, "feature file shorter than its 16-byte header: " + path.string());
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0) {
    fail(ErrorCode::format, "bad magic, not a feature file: " + path.string());
  }
  const uint32_t version = get_u32(p + 4);
  if (version != kFeatureFileVersion) {
    fail(ErrorCode::format,
         "unsupported feature file version " + std::to_string(version) + ": " + path.string());
  }
  const uint32_t rows = get_u32(p + 8);
  const uint32_t cols = get_u32(p + 12);
  if (rows == 0 || cols == 0) {
    fail(ErrorCode::format, "feature file declares an empty matrix: " + path.string());
  }
  const uint64_t payload = static_cast<uint64_t>(rows) * cols * 4;
  if (bytes.size() - 16 < payload) {
    fail(ErrorCode::format, "truncated payload in feature file: " + path.string());
  }
  if (bytes.size() - 16 > payload) {
    fail(ErrorCode::format, "trailing bytes after payload in feature file: " + path.string());
  }

  FeatureSequence seq;
  seq.data = Matrix(rows, cols);
  const unsigned char* q = p + 16;
  for (std::size_t i = 0; i < seq.data.data().size(); ++i, q += 4) {
    const float value = std::bit_cast<float>(get_u32(q));
    if (!std::isfinite(value)) {
      fail(ErrorCode::format, "non-finite value in feature file: " + path.string());
    }
    seq.data.data()[i] = static_cast<double>(value);
  }
  return seq;
}

void encode_feature_file(const FeatureSequence& seq, const std::filesystem::path& path) {
  check_feature_invariants(seq);
  if (seq.data.rows() > std::numeric_limits<uint32_t>::max() ||
      seq.data.cols() > std::numeric_limits<uint32_t>::max()) {
    fail(ErrorCode::argument, "matrix too large for the feature file header");
  }

  std::string bytes;
  bytes.reserve(16 + seq.data.data().size() * 4);
  bytes.append(kMagic, 4);
  put_u32(bytes, kFeatureFileVersion);
  put_u32(bytes, static_cast<uint32_t>(seq.data.rows()));
  put_u32(bytes, static_cast<uint32_t>(seq.data.cols()));
  for (double v : seq.data.data()) {
    put_u32(bytes, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::io, "cannot open feature file for writing: " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    fail(ErrorCode::io, "write failure on feature file: " + path.string());
  }
}

Matrix snippetize_rows(const Matrix& rows, std::size_t snippet_len) {
  if (snippet_len < 1) {
    fail(ErrorCode::argument, "snippet length must be >= 1");
  }
  if (rows.rows() == 0 || rows.cols() == 0) {
    fail(ErrorCode::argument, "snippetize: matrix must be non-empty");
  }
  const std::size_t t = rows.rows();
  const std::size_t d = rows.cols();
  const std::size_t out_rows = snippet_count(t, snippet_len);
  Matrix out(out_rows, d);
  for (std::size_t s = 0; s < out_rows; ++s) {
    for (std::size_t j = 0; j < snippet_len; ++j) {
      // Rows past the end replicate the final frame.
      const std::size_t src = std::min(s * snippet_len + j, t - 1);
      for (std::size_t c = 0; c < d; ++c) {
        out(s, c) += rows(src, c);
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      out(s, c) /= static_cast<double>(snippet_len);
    }
  }
  return out;
}

FeatureSequence snippetize(const FeatureSequence& seq, std::size_t snippet_len) {
  check_feature_invariants(seq);
  FeatureSequence out;
  out.data = snippetize_rows(seq.data, snippet_len);
  if (seq.frame_rate_hint) {
    out.frame_rate_hint = *seq.frame_rate_hint / static_cast<double>(snippet_len);
  }
  return out;
}

}  // namespace wsvad
