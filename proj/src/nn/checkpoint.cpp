#include "checkpoint.hpp"

#include <cstring>

#include "../env_io.hpp"

namespace cgmkit::nn {

namespace {

constexpr char kMagic[8] = {'C', 'G', 'M', 'K', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t take_u32(const std::string& in, std::size_t& pos) {
  require(pos + 4 <= in.size(), ErrorKind::corrupt_file, "checkpoint truncated");
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, std::uint32_t(ckpt.config_json.size()));
  out += ckpt.config_json;
  put_u32(out, std::uint32_t(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    put_u32(out, std::uint32_t(name.size()));
    out += name;
    put_u32(out, std::uint32_t(t.shape.size()));
    for (int d : t.shape) put_u32(out, std::uint32_t(d));
    const std::size_t bytes = t.values.size() * sizeof(float);
    out.append(reinterpret_cast<const char*>(t.values.data()), bytes);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  require(bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0,
          ErrorKind::corrupt_file, "not a checkpoint file");
  std::size_t pos = sizeof(kMagic);
  require(take_u32(bytes, pos) == kVersion, ErrorKind::corrupt_file,
          "unsupported checkpoint version");
  Checkpoint ckpt;
  const std::uint32_t json_len = take_u32(bytes, pos);
  require(pos + json_len <= bytes.size(), ErrorKind::corrupt_file, "checkpoint truncated");
  ckpt.config_json = bytes.substr(pos, json_len);
  pos += json_len;
  const std::uint32_t count = take_u32(bytes, pos);
  ckpt.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = take_u32(bytes, pos);
    require(pos + name_len <= bytes.size(), ErrorKind::corrupt_file, "checkpoint truncated");
    std::string name = bytes.substr(pos, name_len);
    pos += name_len;
    const std::uint32_t rank = take_u32(bytes, pos);
    require(rank >= 1 && rank <= 8, ErrorKind::corrupt_file, "checkpoint tensor rank out of range");
    std::vector<int> shape(rank);
    std::int64_t numel = 1;
    for (auto& d : shape) {
      d = int(take_u32(bytes, pos));
      require(d > 0, ErrorKind::corrupt_file, "checkpoint tensor dimension out of range");
      numel *= d;
    }
    const std::size_t data_bytes = std::size_t(numel) * sizeof(float);
    require(pos + data_bytes <= bytes.size(), ErrorKind::corrupt_file, "checkpoint truncated");
    std::vector<float> values(static_cast<std::size_t>(numel));
    std::memcpy(values.data(), bytes.data() + pos, data_bytes);
    pos += data_bytes;
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  require(pos == bytes.size(), ErrorKind::corrupt_file, "checkpoint has trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace cgmkit::nn
