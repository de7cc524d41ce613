#include "csg/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

CSG_NAMESPACE_BEGIN
namespace ad {
namespace {

template <typename T>
void put_le(std::vector<char>& buf, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

Shape parse_shape(const std::string& text) {
  Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(static_cast<std::size_t>(std::stoull(part)));
  return shape;
}

std::string format_shape(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParamSet& params, const CheckpointMeta& meta) {
  std::vector<char> payload;
  std::ostringstream manifest;
  manifest << kCheckpointMagic << '\n';
  for (const auto& [key, value] : meta) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos)
      throw std::invalid_argument("write_checkpoint: meta entry '" + key + "' contains a separator");
    manifest << "meta " << key << ' ' << value << '\n';
  }
  for (const auto& [name, t] : params) {
    manifest << "param " << name << ' ' << kRealName << ' ' << format_shape(t.shape()) << ' ' << payload.size() << '\n';
    for (Real v : t.data()) put_le(payload, v);
  }
  manifest << "end\n";
  const std::string header = manifest.str();
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw std::runtime_error("read_checkpoint: missing " + std::string(kCheckpointMagic) + " header");
  struct Entry {
    std::string name, dtype;
    Shape shape;
    std::size_t offset;
  };
  Checkpoint ckpt;
  std::vector<Entry> entries;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      ckpt.meta[key] = value;
    } else if (kind == "param") {
      Entry e;
      std::string shape;
      ls >> e.name >> e.dtype >> shape >> e.offset;
      if (!ls || (e.dtype != "f32" && e.dtype != "f64")) throw std::runtime_error("read_checkpoint: bad manifest line '" + line + "'");
      e.shape = parse_shape(shape);
      entries.push_back(std::move(e));
    } else {
      throw std::runtime_error("read_checkpoint: unexpected manifest line '" + line + "'");
    }
  }
  if (!ended) throw std::runtime_error("read_checkpoint: manifest not terminated");
  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const Entry& e : entries) {
    const std::size_t width = e.dtype == "f32" ? 4 : 8;
    const std::size_t count = shape_size(e.shape);
    if (e.offset + count * width > payload.size())
      throw std::runtime_error("read_checkpoint: payload truncated for '" + e.name + "'");
    std::vector<Real> values(count);
    const char* p = payload.data() + e.offset;
    for (std::size_t i = 0; i < count; ++i)
      values[i] = width == 4 ? static_cast<Real>(get_le<float>(p + 4 * i)) : static_cast<Real>(get_le<double>(p + 8 * i));
    ckpt.params.add(e.name, Tensor::from(e.shape, std::move(values)));
  }
  if (auto it = ckpt.meta.find("version"); it != ckpt.meta.end()) ckpt.params.set_version(std::stoull(it->second));
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const CheckpointMeta& meta) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp.string());
    write_checkpoint(out, params, meta);
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("save_checkpoint: cannot move into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace ad
CSG_NAMESPACE_END
