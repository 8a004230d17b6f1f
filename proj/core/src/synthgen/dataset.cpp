#include "egocf/synthgen/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "egocf/errors.hpp"
#include "egocf/numkit/checkpoint.hpp"
#include "egocf/numkit/rng.hpp"

namespace egocf::synthgen {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVideosFile = "videos.bin";

std::string video_id(const std::string& prefix, std::size_t episode) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", episode);
  return prefix + "_" + buf;
}

std::vector<std::string> base_vocabulary(const WorldSpec& world) {
  std::set<std::string> words{"what", "did", "the", "person", "do", "after", "before",
                              "was", "first", "last", "action"};
  words.insert(world.verbs.begin(), world.verbs.end());
  words.insert(world.objects.begin(), world.objects.end());
  return {words.begin(), words.end()};
}

}  // namespace

const videocf::FrameGrid& Dataset::video(const std::string& id) const {
  auto it = videos.find(id);
  if (it == videos.end()) throw InputError("unknown video id " + id);
  return it->second;
}

Dataset generate_dataset(const WorldSpec& world, const GenerationOptions& o,
                         const std::vector<std::string>& extra_vocabulary) {
  world.validate();
  if (o.min_events < 2 || o.max_events < o.min_events || o.max_events > world.n_frames) {
    throw ConfigError("event count range must satisfy 2 <= min <= max <= n_frames");
  }
  if (o.questions_per_episode == 0) throw ConfigError("questions_per_episode must be >= 1");

  Dataset ds;
  ds.world = world;
  const AnswerSet answers(world);
  ds.answers = answers.strings();
  {
    auto words = base_vocabulary(world);
    std::set<std::string> seen(words.begin(), words.end());
    for (const auto& w : extra_vocabulary) {
      if (seen.insert(w).second) words.push_back(w);
    }
    ds.vocabulary = std::move(words);
  }
  const GlyphTable glyphs(world);
  const auto rect = glyph_rect(world);

  for (std::size_t e = 0; ds.records.size() < o.num_records; ++e) {
    numkit::Rng episode_rng(numkit::Rng::derive_seed(o.seed, {e, 0}));
    numkit::Rng render_rng(numkit::Rng::derive_seed(o.seed, {e, 1}));
    numkit::Rng qa_rng(numkit::Rng::derive_seed(o.seed, {e, 2}));

    const std::size_t k = o.min_events + episode_rng.index(o.max_events - o.min_events + 1);
    Episode ep = generate_episode(world, k, episode_rng);
    ep.seed = numkit::Rng::derive_seed(o.seed, {e, 0});
    const std::string id = video_id(o.id_prefix, e);

    auto candidates = generate_qa(ep, world, answers, qa_rng);
    qa_rng.shuffle(candidates);
    const std::size_t take = std::min({o.questions_per_episode, candidates.size(),
                                       o.num_records - ds.records.size()});
    for (std::size_t i = 0; i < take; ++i) {
      candidates[i].video_id = id;
      ds.records.push_back(std::move(candidates[i]));
    }

    ds.videos.emplace(id, render_episode(ep, world, glyphs, render_rng));
    auto& boxes = ds.bboxes[id];
    for (std::size_t n = 0; n < world.n_frames; ++n) boxes.push_back({id, n, {rect}});
    ds.episodes.emplace(id, std::move(ep));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  json episodes = json::object();
  for (const auto& [id, ep] : ds.episodes) {
    json events = json::array();
    for (const auto& e : ep.events) events.push_back({e.verb, e.object});
    episodes[id] = {{"events", events}, {"seed", ep.seed}};
  }
  const json meta = {{"format_version", kDatasetFormatVersion},
                     {"world", to_json(ds.world)},
                     {"answers", ds.answers},
                     {"vocabulary", ds.vocabulary},
                     {"episodes", episodes},
                     {"record_count", ds.records.size()},
                     {"videos_file", kVideosFile}};
  {
    std::ofstream out(dir / "dataset.json", std::ios::trunc);
    if (!out) throw FormatError("cannot write " + (dir / "dataset.json").string());
    out << meta.dump(1) << '\n';
  }
  {
    std::ofstream out(dir / "records.jsonl", std::ios::trunc);
    if (!out) throw FormatError("cannot write " + (dir / "records.jsonl").string());
    for (const auto& r : ds.records) {
      out << json{{"video_id", r.video_id},
                  {"question_tokens", r.question},
                  {"answer_label", r.answer_label},
                  {"category", std::string(to_string(r.category))},
                  {"frames_ref", std::string(kVideosFile) + "#" + r.video_id}}
                 .dump()
          << '\n';
    }
  }
  numkit::TensorArchive archive;
  for (const auto& [id, v] : ds.videos) archive.tensors.emplace(id, v.tensor());
  archive.meta = {{"kind", "videos"}};
  numkit::write_archive(dir / kVideosFile, archive);
  videocf::write_bboxes(dir / "bboxes.jsonl", ds.bboxes);
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / "dataset.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw FormatError("missing dataset manifest " + meta_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  const int version = meta.value("format_version", -1);
  if (version != kDatasetFormatVersion) {
    throw FormatError(meta_path.string() + ": unsupported format_version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kDatasetFormatVersion) + ")");
  }

  Dataset ds;
  ds.world = world_from_json(meta.at("world"));
  ds.answers = meta.at("answers").get<std::vector<std::string>>();
  ds.vocabulary = meta.at("vocabulary").get<std::vector<std::string>>();
  for (const auto& [id, ep] : meta.at("episodes").items()) {
    Episode e;
    e.seed = ep.at("seed").get<std::uint64_t>();
    for (const auto& pair : ep.at("events")) {
      e.events.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
    }
    ds.episodes.emplace(id, std::move(e));
  }

  const fs::path records_path = dir / "records.jsonl";
  std::ifstream rin(records_path);
  if (!rin) throw FormatError("missing records file " + records_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(rin, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      QARecord r;
      r.video_id = j.at("video_id").get<std::string>();
      r.question = j.at("question_tokens").get<textcf::Tokens>();
      r.answer_label = j.at("answer_label").get<std::size_t>();
      r.category = parse_category(j.at("category").get<std::string>());
      if (r.answer_label >= ds.answers.size()) {
        throw FormatError("answer_label out of range");
      }
      ds.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(records_path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const FormatError& e) {
      throw FormatError(records_path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }

  const fs::path videos_path = dir / meta.value("videos_file", std::string(kVideosFile));
  if (!fs::exists(videos_path)) {
    throw FormatError("missing video blob file " + videos_path.string());
  }
  auto archive = numkit::read_archive(videos_path);
  for (auto& [id, tensor] : archive.tensors) {
    ds.videos.emplace(id, videocf::FrameGrid(std::move(tensor)));
  }
  for (const auto& r : ds.records) {
    if (!ds.videos.count(r.video_id)) {
      throw FormatError(records_path.string() + ": record refers to missing video " +
                        r.video_id + " in " + videos_path.string());
    }
  }
  const fs::path bbox_path = dir / "bboxes.jsonl";
  if (fs::exists(bbox_path)) ds.bboxes = videocf::read_bboxes(bbox_path);
  return ds;
}

}  // namespace egocf::synthgen
