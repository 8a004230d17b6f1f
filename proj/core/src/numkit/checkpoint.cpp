#include "egocf/numkit/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "egocf/errors.hpp"

namespace egocf::numkit {
namespace {

using nlohmann::json;

void put_le64(double value, char* out) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) {
    out[b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
}

double get_le64(const char* in) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[b]))
            << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_archive(const std::filesystem::path& path,
                   const TensorArchive& archive) {
  json manifest;
  manifest["format_version"] = kArchiveFormatVersion;
  manifest["meta"] = archive.meta;
  json entries = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, tensor] : archive.tensors) {
    entries.push_back({{"name", name}, {"shape", tensor.shape()}, {"offset", offset}});
    offset += 8 * tensor.size();
  }
  manifest["tensors"] = std::move(entries);
  manifest["blob_bytes"] = offset;

  std::vector<char> blob(offset);
  std::size_t pos = 0;
  for (const auto& [name, tensor] : archive.tensors) {
    for (double v : tensor.values()) {
      put_le64(v, blob.data() + pos);
      pos += 8;
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const std::string header = manifest.dump() + "\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

TensorArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor archive " + path.string());
  std::string header;
  if (!std::getline(in, header)) {
    throw FormatError(path.string() + ": missing manifest line");
  }
  json manifest;
  try {
    manifest = json::parse(header);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  const int version = manifest.value("format_version", -1);
  if (version != kArchiveFormatVersion) {
    throw FormatError(path.string() + ": unsupported format_version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kArchiveFormatVersion) + ")");
  }

  const std::uint64_t header_bytes = header.size() + 1;
  const std::uint64_t blob_bytes = manifest.at("blob_bytes").get<std::uint64_t>();
  std::vector<char> blob(blob_bytes);
  in.read(blob.data(), static_cast<std::streamsize>(blob_bytes));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got != blob_bytes) {
    throw FormatError(path.string() + ": truncated blob at byte offset " +
                      std::to_string(header_bytes + got) + " (expected " +
                      std::to_string(blob_bytes) + " blob bytes, found " +
                      std::to_string(got) + ")");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after blob at offset " +
                      std::to_string(header_bytes + blob_bytes));
  }

  TensorArchive archive;
  archive.meta = manifest.value("meta", json::object());
  for (const auto& entry : manifest.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t bytes = 8 * shape_numel(shape);
    if (offset + bytes > blob_bytes) {
      throw FormatError(path.string() + ": tensor '" + name + "' at offset " +
                        std::to_string(offset) + " overruns blob of " +
                        std::to_string(blob_bytes) + " bytes");
    }
    std::vector<double> values(shape_numel(shape));
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = get_le64(blob.data() + offset + 8 * i);
    }
    archive.tensors.emplace(name, Tensor(shape, std::move(values)));
  }
  return archive;
}

}  // namespace egocf::numkit
