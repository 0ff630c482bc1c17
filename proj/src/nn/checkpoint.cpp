#include "deepref/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>

#include "deepref/error.hpp"

namespace deepref::nn {

namespace {

constexpr const char* kMagic = "deepref-checkpoint";

void write_double(std::ostream& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (auto& b : bytes) {
    b = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes, 8);
}

bool read_double(std::istream& in, double& value) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | bytes[k];
  value = std::bit_cast<double>(bits);
  return true;
}

template <typename Net>
void save_impl(const std::filesystem::path& path, Net& net) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const auto& s = net.shape();
  out << kMagic << " 1\n";
  out << "kind " << to_string(s.kind) << "\n";
  out << "shape " << s.input << " " << s.hidden << " " << s.actions << "\n";
  for (const auto& l : net.layers()) {
    out << "layer " << l.role << " " << l.type << " " << l.in << " " << l.out << "\n";
  }
  auto params = net.parameters();
  for (const auto& t : params) out << "tensor " << t.rows << " " << t.cols << "\n";
  out << "end\n";
  for (const auto& t : params) {
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) write_double(out, t.data[c * t.rows + r]);
    }
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

CheckpointHeader parse_header(std::istream& in, const std::string& source) {
  CheckpointHeader h;
  std::string line;
  std::size_t lineno = 0;
  bool have_kind = false, have_shape = false, ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (lineno == 1) {
      if (key != kMagic || !(ls >> h.version)) throw ParseError(source, lineno, "not a checkpoint");
      if (h.version != 1) throw ParseError(source, lineno, "unsupported version");
      continue;
    }
    if (key == "end") {
      ended = true;
      break;
    }
    if (key == "kind") {
      std::string kind;
      ls >> kind;
      if (kind == "dqn") {
        h.shape.kind = NetworkKind::kFeedForward;
      } else if (kind == "drqn") {
        h.shape.kind = NetworkKind::kRecurrent;
      } else {
        throw ParseError(source, lineno, "unknown kind '" + kind + "'");
      }
      have_kind = true;
    } else if (key == "shape") {
      if (!(ls >> h.shape.input >> h.shape.hidden >> h.shape.actions)) {
        throw ParseError(source, lineno, "bad shape line");
      }
      have_shape = true;
    } else if (key == "layer") {
      LayerInfo l;
      if (!(ls >> l.role >> l.type >> l.in >> l.out)) throw ParseError(source, lineno, "bad layer line");
      h.layers.push_back(l);
    } else if (key == "tensor") {
      std::size_t r = 0, c = 0;
      if (!(ls >> r >> c)) throw ParseError(source, lineno, "bad tensor line");
      h.tensors.emplace_back(r, c);
    } else {
      throw ParseError(source, lineno, "unexpected header key '" + key + "'");
    }
  }
  if (lineno == 0) throw DataError(source + ": empty checkpoint");
  if (!ended || !have_kind || !have_shape) throw DataError(source + ": incomplete checkpoint header");
  return h;
}

std::ifstream open_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return in;
}

template <typename Net>
Net load_impl(const std::filesystem::path& path, NetworkKind kind) {
  auto in = open_checkpoint(path);
  const auto source = path.string();
  const auto header = parse_header(in, source);
  if (header.shape.kind != kind) {
    throw DataError(source + ": checkpoint holds a " + to_string(header.shape.kind) +
                    " network, expected " + to_string(kind));
  }
  std::mt19937_64 rng(0);
  Net net;
  try {
    net = Net(header.shape, rng);
  } catch (const UsageError& e) {
    throw DataError(source + ": " + e.what());
  }
  const auto expected = net.layers();
  if (expected.size() != header.layers.size()) throw DataError(source + ": layer count mismatch");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& a = expected[k];
    const auto& b = header.layers[k];
    if (a.role != b.role || a.type != b.type || a.in != b.in || a.out != b.out) {
      throw DataError(source + ": layer " + std::to_string(k) + " shape mismatch");
    }
  }
  auto params = net.parameters();
  if (params.size() != header.tensors.size()) throw DataError(source + ": tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].rows != header.tensors[k].first || params[k].cols != header.tensors[k].second) {
      throw DataError(source + ": tensor " + std::to_string(k) + " shape mismatch");
    }
  }
  for (auto& t : params) {
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        if (!read_double(in, t.data[c * t.rows + r])) {
          throw DataError(source + ": truncated checkpoint");
        }
      }
    }
  }
  char extra;
  if (in.read(&extra, 1)) throw DataError(source + ": trailing bytes after parameters");
  return net;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, FeedForwardQNet& net) { save_impl(path, net); }
void save_checkpoint(const std::filesystem::path& path, RecurrentQNet& net) { save_impl(path, net); }

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  auto in = open_checkpoint(path);
  return parse_header(in, path.string());
}

FeedForwardQNet load_feedforward(const std::filesystem::path& path) {
  return load_impl<FeedForwardQNet>(path, NetworkKind::kFeedForward);
}

RecurrentQNet load_recurrent(const std::filesystem::path& path) {
  return load_impl<RecurrentQNet>(path, NetworkKind::kRecurrent);
}

}  // namespace deepref::nn
