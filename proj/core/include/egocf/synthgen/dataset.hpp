#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "egocf/synthgen/generate.hpp"
#include "egocf/synthgen/world.hpp"
#include "egocf/videocf/frame_grid.hpp"
#include "egocf/videocf/region.hpp"

namespace egocf::synthgen {

inline constexpr int kDatasetFormatVersion = 1;

struct GenerationOptions {
  std::size_t num_records = 2000;
  std::size_t questions_per_episode = 4;
  std::size_t min_events = 3;
  std::size_t max_events = 5;
  std::uint64_t seed = 0;
  std::string id_prefix = "ep";
};

// One split: QA records plus the clips they refer to.
struct Dataset {
  WorldSpec world;
  std::vector<std::string> answers;
  // Every word the generator and the text augmentations can emit.
  std::vector<std::string> vocabulary;
  std::vector<QARecord> records;
  std::map<std::string, Episode> episodes;
  std::map<std::string, videocf::FrameGrid> videos;
  // Glyph rectangles per frame, usable as f_v4 hand-object boxes.
  videocf::BBoxIndex bboxes;

  const videocf::FrameGrid& video(const std::string& id) const;
};

// Episode e draws from streams derived from (options.seed, e), so any
// subset of episodes can be regenerated independently.
Dataset generate_dataset(const WorldSpec& world, const GenerationOptions& options,
                         const std::vector<std::string>& extra_vocabulary = {});

// Directory layout:
//   dataset.json   format_version, world, answers, vocabulary, episodes
//   records.jsonl  {video_id, question_tokens, answer_label, category, frames_ref}
//   videos.bin     tensor archive, one N x C x H x W tensor per video id
//   bboxes.jsonl   per-frame glyph boxes
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
// Throws FormatError on version mismatch, missing files (the message names
// the path), truncated blobs, or records pointing at unknown videos.
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace egocf::synthgen
