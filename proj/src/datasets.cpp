#include "gsn/datasets.hpp"

#include "gsn/rng.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace gsn {

void Dataset::validate() const {
  if (static_cast<Index>(splits.size()) != examples.rows()) throw ParameterError("dataset: one split tag per example required");
  if (kind == ValueKind::Binary && !(examples.array() == 0.0 || examples.array() == 1.0).all())
    throw ParameterError("dataset: binary kind holds a value outside {0, 1}");
  if (kind == ValueKind::Unit && !((examples.array() >= 0.0) && (examples.array() <= 1.0)).all())
    throw ParameterError("dataset: unit kind holds a value outside [0, 1]");
}

Matrix Dataset::subset(Split split) const {
  std::vector<Index> rows;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == split) rows.push_back(static_cast<Index>(i));
  Matrix out(static_cast<Index>(rows.size()), examples.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = examples.row(rows[i]);
  return out;
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size())
    throw FormatError("IDX: file truncated at byte " + std::to_string(bytes.size()) + " (needed 4 bytes at offset " +
                      std::to_string(offset) + ")");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

void put_be32(std::ostream& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.put(static_cast<char>((v >> shift) & 0xFF));
}

}  // namespace

Dataset parse_idx(const std::string& bytes, ValueKind kind) {
  if (bytes.empty()) throw FormatError("IDX: empty file (byte offset 0)");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic == kIdxLabelMagic)
    throw FormatError("IDX: found label magic " + hex32(magic) + " at byte offset 0, expected image magic " +
                      hex32(kIdxImageMagic));
  if (magic != kIdxImageMagic)
    throw FormatError("IDX: bad magic " + hex32(magic) + " at byte offset 0, expected " + hex32(kIdxImageMagic));
  const std::uint32_t count = read_be32(bytes, 4);
  const std::uint32_t rows = read_be32(bytes, 8);
  const std::uint32_t cols = read_be32(bytes, 12);
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const std::size_t need = 16 + static_cast<std::size_t>(count) * pixels;
  if (bytes.size() < need)
    throw FormatError("IDX: truncated pixel data at byte offset " + std::to_string(bytes.size()) + ", expected " +
                      std::to_string(need) + " bytes");

  Dataset ds;
  ds.kind = kind;
  ds.image_rows = rows;
  ds.image_cols = cols;
  ds.examples.resize(count, static_cast<Index>(pixels));
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t p = 0; p < pixels; ++p) {
      const double v = static_cast<unsigned char>(bytes[16 + n * pixels + p]) / 255.0;
      ds.examples(static_cast<Index>(n), static_cast<Index>(p)) = kind == ValueKind::Binary ? (v >= 0.5 ? 1.0 : 0.0) : v;
    }
  ds.splits.assign(count, Split::Train);
  return ds;
}

Dataset load_idx(const std::filesystem::path& path, ValueKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("IDX: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_idx(ss.str(), kind);
}

void write_idx(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, Index count, Index rows,
               Index cols) {
  if (static_cast<Index>(pixels.size()) != count * rows * cols) throw ShapeError("write_idx: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("IDX: cannot open " + path.string() + " for writing");
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(count));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

ToyKind parse_toy_kind(const std::string& name) {
  if (name == "two-gaussians-2d") return ToyKind::TwoGaussians2d;
  if (name == "bit-patterns") return ToyKind::BitPatterns;
  if (name == "ring") return ToyKind::Ring;
  throw ParameterError("unknown toy dataset kind '" + name + "'");
}

std::string to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::TwoGaussians2d: return "two-gaussians-2d";
    case ToyKind::BitPatterns: return "bit-patterns";
    case ToyKind::Ring: return "ring";
  }
  return "?";
}

RowVector default_bit_table(Index bits) {
  if (bits < 1 || bits > 8) throw ParameterError("bit-patterns support 1..8 bits");
  const Index n = Index{1} << bits;
  const Index half = bits / 2;
  const Index low = (Index{1} << half) - 1;
  const Index high = (n - 1) & ~low;
  Index alternating = 0;
  for (Index i = 0; i < bits; i += 2) alternating |= Index{1} << i;
  const Index prototypes[3] = {low, high, alternating};
  const double weights[3] = {0.5, 0.3, 0.2};
  constexpr double flip = 0.1;

  RowVector table = RowVector::Zero(n);
  for (Index s = 0; s < n; ++s)
    for (int k = 0; k < 3; ++k) {
      const int flips = std::popcount(static_cast<unsigned>(s ^ prototypes[k]));
      table(s) += weights[k] * std::pow(flip, flips) * std::pow(1.0 - flip, static_cast<double>(bits - flips));
    }
  return table / table.sum();
}

Dataset make_toy(ToyKind kind, Index n, std::uint64_t seed, const ToyOptions& options) {
  if (n < 1) throw ParameterError("make_toy: n must be >= 1");
  Rng rng(seed);
  Dataset ds;
  ds.splits.assign(static_cast<std::size_t>(n), Split::Train);
  switch (kind) {
    case ToyKind::TwoGaussians2d: {
      ds.kind = ValueKind::Real;
      ds.examples.resize(n, 2);
      for (Index i = 0; i < n; ++i) {
        const double centre = rng.uniform() < 0.5 ? -2.0 : 2.0;
        ds.examples(i, 0) = centre + 0.3 * rng.normal();
        ds.examples(i, 1) = 0.3 * rng.normal();
      }
      break;
    }
    case ToyKind::BitPatterns: {
      if (options.bits < 1 || options.bits > 8) throw ParameterError("bit-patterns support 1..8 bits");
      const Index states = Index{1} << options.bits;
      RowVector table = options.table ? *options.table : default_bit_table(options.bits);
      if (table.size() != states) throw ShapeError("bit-pattern table must have 2^bits entries");
      if ((table.array() < 0.0).any() || std::abs(table.sum() - 1.0) > 1e-9)
        throw ParameterError("bit-pattern table must be a distribution");
      ds.kind = ValueKind::Binary;
      ds.examples.resize(n, options.bits);
      for (Index i = 0; i < n; ++i) {
        double u = rng.uniform();
        Index s = 0;
        while (s + 1 < states && u >= table(s)) u -= table(s++);
        for (Index b = 0; b < options.bits; ++b) ds.examples(i, b) = static_cast<double>((s >> b) & 1);
      }
      ds.table = std::move(table);
      break;
    }
    case ToyKind::Ring: {
      ds.kind = ValueKind::Real;
      ds.examples.resize(n, 2);
      for (Index i = 0; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        const double radius = 1.0 + 0.1 * rng.normal();
        ds.examples(i, 0) = radius * std::cos(angle);
        ds.examples(i, 1) = radius * std::sin(angle);
      }
      break;
    }
  }
  return ds;
}

Dataset downsample(const Dataset& ds, Index factor) {
  if (factor < 1) throw ParameterError("downsample: factor must be >= 1");
  Index rows = ds.image_rows;
  Index cols = ds.image_cols;
  if (rows == 0 || cols == 0) {
    rows = cols = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(ds.dimension()))));
    if (rows * cols != ds.dimension()) throw ParameterError("downsample: examples are not square images");
  }
  if (rows % factor != 0 || cols % factor != 0)
    throw ParameterError("downsample: image " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " not divisible by " + std::to_string(factor));
  const Index out_rows = rows / factor;
  const Index out_cols = cols / factor;
  Dataset out = ds;
  out.image_rows = out_rows;
  out.image_cols = out_cols;
  out.table.reset();
  out.examples.resize(ds.size(), out_rows * out_cols);
  const double area = static_cast<double>(factor * factor);
  for (Index n = 0; n < ds.size(); ++n)
    for (Index r = 0; r < out_rows; ++r)
      for (Index c = 0; c < out_cols; ++c) {
        double acc = 0.0;
        for (Index dr = 0; dr < factor; ++dr)
          for (Index dc = 0; dc < factor; ++dc) acc += ds.examples(n, (r * factor + dr) * cols + c * factor + dc);
        double v = acc / area;
        if (ds.kind == ValueKind::Binary) v = v >= 0.5 ? 1.0 : 0.0;
        out.examples(n, r * out_cols + c) = v;
      }
  return out;
}

Matrix parse_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw FormatError(source + ": non-numeric value on line " + std::to_string(line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

Matrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  out << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_csv(out, m, header);
}

}  // namespace gsn
