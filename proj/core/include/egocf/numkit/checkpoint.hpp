#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "egocf/numkit/tensor.hpp"

namespace egocf::numkit {

inline constexpr int kArchiveFormatVersion = 1;

// On-disk layout:
//   line 1: compact JSON manifest terminated by '\n'
//           {"format_version":1,"blob_bytes":B,"meta":{...},
//            "tensors":[{"name":..,"shape":[..],"offset":bytes},...]}
//   rest:   B bytes of little-endian IEEE-754 binary64 values, tensors laid
//           out back to back in manifest order.
// Tensors are written in name order, so identical contents give identical
// bytes.
struct TensorArchive {
  std::map<std::string, Tensor> tensors;
  nlohmann::json meta = nlohmann::json::object();
};

void write_archive(const std::filesystem::path& path,
                   const TensorArchive& archive);

// Throws FormatError on a missing file, unknown version, malformed manifest
// or a blob shorter/longer than the manifest promises.
TensorArchive read_archive(const std::filesystem::path& path);

}  // namespace egocf::numkit
