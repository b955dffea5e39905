#include "lsic/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace lsic {

namespace {
constexpr char kMagic[8] = {'L', 'S', 'I', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void Checkpoint::put(const std::string& name, const ParamTensor& t) {
  Blob b;
  b.shape = t.shape;
  b.data.assign(t.values.data(), t.values.data() + t.size());
  tensors[name] = std::move(b);
}

void Checkpoint::fill(const std::string& name, ParamTensor& t) const {
  auto it = tensors.find(name);
  if (it == tensors.end())
    throw IoError("checkpoint: missing tensor '" + name + "'");
  const Blob& b = it->second;
  if (b.shape != t.shape)
    throw IoError("checkpoint: shape mismatch for tensor '" + name + "'");
  for (std::size_t i = 0; i < b.data.size(); ++i)
    t.values[static_cast<Eigen::Index>(i)] = static_cast<real>(b.data[i]);
  t.zero_grad();
}

void Checkpoint::put_set(const std::string& prefix, const ParamSet& ps) {
  for (const auto& t : ps.tensors()) put(prefix + t->name, *t);
}

void Checkpoint::fill_set(const std::string& prefix, ParamSet& ps) const {
  for (auto& t : ps.tensors()) fill(prefix + t->name, *t);
}

void Checkpoint::save(const std::string& path) const {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, blob] : tensors) {
    nlohmann::json t;
    t["name"] = name;
    t["shape"] = blob.shape;
    t["offset"] = offset;
    t["count"] = blob.data.size();
    header["tensors"].push_back(t);
    offset += blob.data.size() * sizeof(double);
  }
  header["strings"] = strings;
  header["counters"] = counters;

  const std::string hs = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  const std::uint32_t ver = kVersion;
  os.write(reinterpret_cast<const char*>(&ver), sizeof(ver));
  const std::uint64_t hlen = hs.size();
  os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& [name, blob] : tensors) {
    (void)name;
    os.write(reinterpret_cast<const char*>(blob.data.data()),
             static_cast<std::streamsize>(blob.data.size() * sizeof(double)));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a checkpoint file: " + path);
  std::uint32_t ver = 0;
  is.read(reinterpret_cast<char*>(&ver), sizeof(ver));
  if (ver != kVersion)
    throw IoError("unsupported checkpoint version in " + path);
  std::uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw IoError("truncated checkpoint header: " + path);

  nlohmann::json header = nlohmann::json::parse(hs);
  Checkpoint ck;
  ck.strings = header.at("strings").get<std::map<std::string, std::string>>();
  ck.counters =
      header.at("counters").get<std::map<std::string, std::int64_t>>();
  for (const auto& t : header.at("tensors")) {
    Blob b;
    b.shape = t.at("shape").get<std::vector<int>>();
    const std::size_t count = t.at("count").get<std::size_t>();
    b.data.resize(count);
    is.read(reinterpret_cast<char*>(b.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw IoError("truncated checkpoint data: " + path);
    ck.tensors[t.at("name").get<std::string>()] = std::move(b);
  }
  return ck;
}

}  // namespace lsic
