#include "gsn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gsn {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'N', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
  void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double real() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const GsnModel& model) {
  const auto& cfg = model.config();
  Writer w;
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.uint(kCheckpointVersion);
  w.uint(static_cast<std::uint64_t>(cfg.visible_size));
  w.uint(static_cast<std::uint64_t>(cfg.depth()));
  for (Index s : cfg.hidden_sizes) w.uint(static_cast<std::uint64_t>(s));
  w.real(cfg.eta_in);
  w.real(cfg.eta_out);
  w.real(cfg.input_corruption_p);
  w.uint(static_cast<std::uint64_t>(cfg.walkback_steps));
  w.uint(static_cast<std::uint8_t>(cfg.visible_kind == VisibleKind::Real ? 1 : 0));
  w.uint(static_cast<std::uint8_t>(cfg.corrupt_every_step ? 1 : 0));
  w.uint(static_cast<std::uint8_t>(cfg.persist_h0 ? 1 : 0));
  w.uint(cfg.seed);

  const auto& names = model.params().names();
  w.uint(static_cast<std::uint64_t>(names.size()));
  for (const auto& name : names) {
    const Matrix& m = model.params().owned(name);
    w.uint(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.uint(static_cast<std::uint64_t>(m.rows()));
    w.uint(static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) w.real(m(r, c));
  }
  return w.take();
}

GsnModel deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) throw FormatError("checkpoint: bad magic");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  GsnConfig cfg;
  cfg.visible_size = static_cast<Index>(r.uint<std::uint64_t>());
  const auto depth = r.uint<std::uint64_t>();
  if (depth > 64) throw FormatError("checkpoint: implausible depth " + std::to_string(depth));
  for (std::uint64_t l = 0; l < depth; ++l) cfg.hidden_sizes.push_back(static_cast<Index>(r.uint<std::uint64_t>()));
  cfg.eta_in = r.real();
  cfg.eta_out = r.real();
  cfg.input_corruption_p = r.real();
  cfg.walkback_steps = static_cast<Index>(r.uint<std::uint64_t>());
  cfg.visible_kind = r.uint<std::uint8_t>() ? VisibleKind::Real : VisibleKind::Binary;
  cfg.corrupt_every_step = r.uint<std::uint8_t>() != 0;
  cfg.persist_h0 = r.uint<std::uint8_t>() != 0;
  cfg.seed = r.uint<std::uint64_t>();

  ParameterStore params;
  const auto count = r.uint<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = r.uint<std::uint32_t>();
    std::string name(r.bytes(len));
    const auto rows = r.uint<std::uint64_t>();
    const auto cols = r.uint<std::uint64_t>();
    if (rows * cols > (bytes.size() / 8)) throw FormatError("checkpoint: parameter '" + name + "' larger than file");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index rr = 0; rr < m.rows(); ++rr)
      for (Index c = 0; c < m.cols(); ++c) m(rr, c) = r.real();
    params.add(name, std::move(m));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  try {
    return GsnModel(std::move(cfg), std::move(params));
  } catch (const GraphError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const GsnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const std::string bytes = serialize(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

GsnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t checksum(const GsnModel& model) { return fnv1a64(serialize(model)); }

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

}  // namespace gsn
