#include "spoofvqa/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace spoofvqa {

namespace {

void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<NamedParam>& params,
                     const std::string& config_json) {
  nlohmann::json header;
  header["format"] = "spoofvqa-checkpoint";
  header["version"] = 1;
  header["config"] = config_json.empty()
                         ? nlohmann::json::object()
                         : nlohmann::json::parse(config_json);
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    nlohmann::json t;
    t["name"] = p.name;
    t["shape"] = p.tensor.shape();
    t["offset"] = offset;
    offset += p.tensor.size();
    tensors.push_back(std::move(t));
  }
  header["tensors"] = std::move(tensors);
  const std::string header_text = header.dump();

  std::string blob;
  append_u64_le(blob, header_text.size());
  blob += header_text;
  for (const auto& p : params) {
    for (double d : p.tensor.values()) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      append_u64_le(blob, bits);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (blob.size() < 8)
    throw std::runtime_error("checkpoint '" + path + "' is truncated");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint64_t header_len = read_u64_le(bytes);
  if (8 + header_len > blob.size())
    throw std::runtime_error("checkpoint '" + path + "' is truncated");
  nlohmann::json header = nlohmann::json::parse(blob.substr(8, header_len));
  if (header.at("format") != "spoofvqa-checkpoint")
    throw std::runtime_error("checkpoint '" + path + "': unknown format");

  Checkpoint out;
  out.config_json = header.at("config").dump();
  const unsigned char* payload = bytes + 8 + header_len;
  const std::size_t payload_doubles = (blob.size() - 8 - header_len) / 8;
  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<std::vector<std::size_t>>();
    const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    if (offset + n > payload_doubles)
      throw std::runtime_error("checkpoint '" + path + "': tensor '" + name +
                               "' runs past the payload");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bits = read_u64_le(payload + (offset + i) * 8);
      std::memcpy(&data[i], &bits, 8);
    }
    out.tensors.emplace(name, Tensor::from_data(shape, std::move(data)));
  }
  return out;
}

void restore_parameters(const Checkpoint& ckpt,
                        std::vector<NamedParam>& params) {
  for (auto& p : params) {
    auto it = ckpt.tensors.find(p.name);
    if (it == ckpt.tensors.end())
      throw std::runtime_error("checkpoint: missing tensor '" + p.name + "'");
    if (it->second.shape() != p.tensor.shape())
      throw std::runtime_error("checkpoint: shape mismatch for '" + p.name +
                               "'");
    auto dst = p.tensor.values_mut();
    auto src = it->second.values();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace spoofvqa
