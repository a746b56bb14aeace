#pragma once

#include "gsn/core.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gsn {

enum class ValueKind { Binary, Unit, Real };
enum class Split { Train, Valid, Test };

struct Dataset {
  Matrix examples;  // N x d, one example per row
  std::vector<Split> splits;
  ValueKind kind = ValueKind::Real;
  /// Image geometry when examples are flattened row-major images.
  Index image_rows = 0;
  Index image_cols = 0;
  /// Exact P(X) over 2^d states (bit i of the state index is coordinate i)
  /// for generated bit patterns.
  std::optional<RowVector> table;

  Index size() const { return examples.rows(); }
  Index dimension() const { return examples.cols(); }
  void validate() const;
  Matrix subset(Split split) const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// IDX image file (big-endian header, unsigned bytes). Pixels are scaled to
/// [0, 1]; kind Binary thresholds at >= 0.5. All examples are tagged Train.
Dataset load_idx(const std::filesystem::path& path, ValueKind kind = ValueKind::Unit);
Dataset parse_idx(const std::string& bytes, ValueKind kind = ValueKind::Unit);

/// Writes `count` images of rows x cols bytes.
void write_idx(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, Index count, Index rows,
               Index cols);

enum class ToyKind { TwoGaussians2d, BitPatterns, Ring };

ToyKind parse_toy_kind(const std::string& name);
std::string to_string(ToyKind kind);

struct ToyOptions {
  Index bits = 4;                  // bit-patterns only, 1..8
  std::optional<RowVector> table;  // bit-patterns only; default_bit_table(bits) when absent
};

/// Three prototype patterns (low half on, high half on, alternating) with
/// weights 0.5/0.3/0.2, each bit flipped independently w.p. 0.1.
RowVector default_bit_table(Index bits);

/// two-gaussians-2d: equal mixture at (+-2, 0), std 0.3. bit-patterns: draws
/// from the stored table. ring: unit circle, radial std 0.1.
Dataset make_toy(ToyKind kind, Index n, std::uint64_t seed, const ToyOptions& options = {});

/// Block-mean pooling of square (or declared) images, re-binarized at
/// >= 0.5 when binary.
Dataset downsample(const Dataset& ds, Index factor);

/// Numeric CSV. A first line that does not parse as numbers is a header.
Matrix read_csv(const std::filesystem::path& path);
Matrix parse_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header = {});
void write_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header = {});

}  // namespace gsn
