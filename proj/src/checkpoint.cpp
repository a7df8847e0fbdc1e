#include "uavmtd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace uavmtd {
namespace {

const char* const kHeadLabels[3] = {"head.leader", "head.relay", "head.hop"};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    out_.insert(out_.end(), c, c + n);
  }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<char> take() { return std::move(out_); }

 private:
  std::vector<char> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (at_ + n > in_.size()) throw CheckpointError("truncated checkpoint");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[at_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(in_.data() + at_, n);
    at_ += n;
    return s;
  }
  bool at_end() const { return at_ == in_.size(); }

 private:
  const std::vector<char>& in_;
  std::size_t at_ = 0;
};

void write_layer(Writer& w, const DenseLayer<double>& l, std::uint8_t part, const std::string& label) {
  w.u8(part);
  w.u8(static_cast<std::uint8_t>(label.size()));
  w.bytes(label.data(), label.size());
  w.u32(static_cast<std::uint32_t>(l.weight.rows()));
  w.u32(static_cast<std::uint32_t>(l.weight.cols()));
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) w.f64(l.weight.data()[i]);
  for (Eigen::Index i = 0; i < l.bias.size(); ++i) w.f64(l.bias(i));
}

DenseLayer<double> read_layer(Reader& r, std::uint8_t want_part, const std::string& want_label) {
  const auto part = r.u8();
  const auto label = r.str(r.u8());
  if (part != want_part || label != want_label) {
    throw CheckpointError("unexpected layer '" + label + "', expected '" + want_label + "'");
  }
  const auto rows = r.u32();
  const auto cols = r.u32();
  if (rows == 0 || cols == 0 || rows > 1u << 16 || cols > 1u << 16) {
    throw CheckpointError("implausible shape for layer '" + label + "'");
  }
  DenseLayer<double> l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = r.f64();
  for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = r.f64();
  if (!l.weight.allFinite() || !l.bias.allFinite()) {
    throw CheckpointError("non-finite values in layer '" + label + "'");
  }
  return l;
}

}  // namespace

std::vector<char> encode_checkpoint(const std::vector<Policy>& agents) {
  Writer w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(agents.size()));
  for (const auto& p : agents) {
    w.u32(static_cast<std::uint32_t>(p.shared.size() + 3));
    for (std::size_t i = 0; i < p.shared.size(); ++i) {
      write_layer(w, p.shared[i], 0, "shared." + std::to_string(i));
    }
    for (int k = 0; k < 3; ++k) write_layer(w, p.heads[k], 1, kHeadLabels[k]);
  }
  return w.take();
}

std::vector<Policy> decode_checkpoint(const std::vector<char>& bytes) {
  Reader r(bytes);
  if (r.str(sizeof kCheckpointMagic) != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw CheckpointError("bad magic");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported version " + std::to_string(version));
  }
  const auto n_agents = r.u32();
  if (n_agents == 0 || n_agents > 1024) throw CheckpointError("implausible agent count");
  std::vector<Policy> agents(n_agents);
  for (auto& p : agents) {
    const auto n_layers = r.u32();
    if (n_layers < 4 || n_layers > 64) throw CheckpointError("implausible layer count");
    for (std::uint32_t i = 0; i + 3 < n_layers; ++i) {
      p.shared.push_back(read_layer(r, 0, "shared." + std::to_string(i)));
      if (i > 0 && p.shared[i].in_dim() != p.shared[i - 1].out_dim()) {
        throw CheckpointError("shape mismatch between shared layers");
      }
    }
    for (int k = 0; k < 3; ++k) {
      p.heads[k] = read_layer(r, 1, kHeadLabels[k]);
      if (p.heads[k].in_dim() != p.trunk_dim() || p.heads[k].out_dim() != kHeadSizes[k]) {
        throw CheckpointError(std::string("shape mismatch in ") + kHeadLabels[k]);
      }
    }
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes");
  return agents;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<Policy>& agents) {
  const auto bytes = encode_checkpoint(agents);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed: " + path.string());
}

std::vector<Policy> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path.string() + ": cannot open checkpoint");
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace uavmtd
