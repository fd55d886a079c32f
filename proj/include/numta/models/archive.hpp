#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "numta/models/model.hpp"

namespace numta {

// Named-tensor container:
//   8 bytes  magic "NUMTANTC"
//   u32      format version (little endian)
//   u64      header length in bytes
//   header   UTF-8 JSON: {format_version, kind, config, tensors: [{name, dtype, shape, offset}]}
//   data     tensor payloads; offsets are relative to the start of this section
// dtype is "f64" or "f32". Checkpoints are written as f64 so they round-trip bit-exactly.

inline constexpr std::uint32_t kArchiveFormatVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Archive {
  nlohmann::json metadata = nlohmann::json::object();  // everything in the header except "tensors"
  std::vector<NamedTensor> tensors;
};

void write_archive(const std::filesystem::path& path, const Archive& archive);
/// Throws ArchiveError on unreadable or malformed files.
Archive read_archive(const std::filesystem::path& path);

struct LoadReport {
  std::vector<std::string> matched;
  std::vector<std::string> shape_mismatched;
  std::vector<std::string> missing;       // model tensors absent from the archive
  std::vector<std::string> skipped_head;  // head tensors present in the archive but ignored
};

/// Copies every backbone tensor whose name and shape match. The head keeps its
/// fresh initialisation. Throws IncompatibleArchive when nothing matches.
LoadReport load_pretrained(Model& model, const std::filesystem::path& archive);

void save_checkpoint(Model& model, const std::filesystem::path& path);
/// Rebuilds the model from the stored config and restores every tensor.
/// Throws IncompatibleArchive if the archive holds a different kind.
Model load_checkpoint(BackboneKind kind, const std::filesystem::path& path);

}  // namespace numta
