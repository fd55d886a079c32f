#include "numta/models/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "numta/core/errors.hpp"

namespace numta {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'N', 'U', 'M', 'T', 'A', 'N', 'T', 'C'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ArchiveError("truncated archive header");
  return v;
}

}  // namespace

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  nlohmann::json header = archive.metadata;
  header["format_version"] = kArchiveFormatVersion;
  auto& list = header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& t : archive.tensors) {
    list.push_back({{"name", t.name}, {"dtype", "f64"}, {"shape", t.tensor.shape()}, {"offset", offset}});
    offset += t.tensor.size() * sizeof(double);
  }
  const std::string text = header.dump();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp);
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kArchiveFormatVersion);
    put<std::uint64_t>(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : archive.tensors)
      os.write(reinterpret_cast<const char*>(t.tensor.data()),
               static_cast<std::streamsize>(t.tensor.size() * sizeof(double)));
    if (!os) throw IoError("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArchiveError("cannot open archive " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ArchiveError(path.string() + " is not a numta archive");
  const auto version = get<std::uint32_t>(is);
  if (version != kArchiveFormatVersion)
    throw ArchiveError("unsupported archive version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(is);
  if (header_len > (1ull << 30)) throw ArchiveError("implausible archive header length");
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len))) throw ArchiveError("truncated archive header");
  const auto data_start = static_cast<std::uint64_t>(is.tellg());
  is.seekg(0, std::ios::end);
  const auto data_size = static_cast<std::uint64_t>(is.tellg()) - data_start;

  Archive out;
  try {
    out.metadata = nlohmann::json::parse(text);
    const auto list = out.metadata.at("tensors");
    out.metadata.erase("tensors");
    for (const auto& entry : list) {
      const auto name = entry.at("name").get<std::string>();
      const auto dtype = entry.at("dtype").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const std::size_t count = shape_size(shape);
      const std::size_t width = dtype == "f64" ? 8 : dtype == "f32" ? 4 : 0;
      if (width == 0) throw ArchiveError("tensor " + name + " has unsupported dtype " + dtype);
      if (offset + count * width > data_size) throw ArchiveError("tensor " + name + " runs past the end of the file");
      is.seekg(static_cast<std::streamoff>(data_start + offset));
      Tensor t(shape);
      if (width == 8) {
        is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(count * 8));
      } else {
        std::vector<float> buf(count);
        is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * 4));
        for (std::size_t i = 0; i < count; ++i) t.data()[i] = buf[i];
      }
      if (!is) throw ArchiveError("failed reading tensor " + name);
      out.tensors.push_back({name, std::move(t)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError("malformed archive header: " + std::string(e.what()));
  }
  return out;
}

LoadReport load_pretrained(Model& model, const std::filesystem::path& path) {
  const auto archive = read_archive(path);
  std::map<std::string, const Tensor*> by_name;
  LoadReport report;
  for (const auto& t : archive.tensors) {
    if (Model::is_head(t.name))
      report.skipped_head.push_back(t.name);
    else
      by_name[t.name] = &t.tensor;
  }
  for (auto& p : model.parameters()) {
    if (Model::is_head(p.name)) continue;
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      report.missing.push_back(p.name);
    } else if (it->second->shape() != p.value->shape()) {
      report.shape_mismatched.push_back(p.name);
    } else {
      *p.value = *it->second;
      report.matched.push_back(p.name);
    }
  }
  if (report.matched.empty())
    throw IncompatibleArchive("no tensor in " + path.string() + " matches " + std::string(to_string(model.kind())));
  return report;
}

void save_checkpoint(Model& model, const std::filesystem::path& path) {
  Archive a;
  a.metadata["kind"] = std::string(to_string(model.kind()));
  a.metadata["config"] = to_json(model.config());
  for (const auto& p : model.parameters()) a.tensors.push_back({p.name, *p.value});
  write_archive(path, a);
}

Model load_checkpoint(BackboneKind kind, const std::filesystem::path& path) {
  auto archive = read_archive(path);
  const auto stored = archive.metadata.value("kind", std::string());
  if (stored != to_string(kind))
    throw IncompatibleArchive("checkpoint holds '" + stored + "', expected '" + std::string(to_string(kind)) + "'");
  auto config = model_config_from_json(archive.metadata.value("config", nlohmann::json::object()));
  // The checkpoint already carries every tensor; do not chase a pretrained archive again.
  config.weight_init.source = WeightInit::Source::random;
  config.weight_init.archive.clear();
  Model model = build_model(kind, config);
  std::map<std::string, Tensor*> params;
  for (auto& p : model.parameters()) params[p.name] = p.value;
  if (params.size() != archive.tensors.size())
    throw IncompatibleArchive("checkpoint tensor count does not match the architecture");
  for (auto& t : archive.tensors) {
    const auto it = params.find(t.name);
    if (it == params.end() || it->second->shape() != t.tensor.shape())
      throw IncompatibleArchive("checkpoint tensor " + t.name + " does not fit the architecture");
    *it->second = std::move(t.tensor);
  }
  return model;
}

}  // namespace numta
