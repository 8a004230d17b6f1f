#include "egocf/trainkit/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "egocf/errors.hpp"
#include "egocf/numkit/checkpoint.hpp"
#include "egocf/synthgen/dataset.hpp"
#include "egocf/textcf/events.hpp"
#include "egocf/trainkit/config.hpp"
#include "egocf/trainkit/evaluate.hpp"
#include "egocf/trainkit/gradcheck.hpp"
#include "egocf/trainkit/trainer.hpp"

namespace egocf::trainkit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kGradTolerance = 1e-4;

// Config file plus `--key value` overrides shared by train/eval/audit/ablate.
struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "JSON config file");
    for (const auto& key : override_keys()) {
      std::string names = "--" + key.flag;
      if (key.flag == "checkpoint_in") names += ",--checkpoint";
      app->add_option(names, values[key.flag], "config key " + key.pointer);
    }
  }

  TrainConfig resolve(const CLI::App* app) const {
    TrainConfig cfg = file.empty() ? TrainConfig{} : load_train_config(file);
    for (const auto& key : override_keys()) {
      if (app->count("--" + key.flag) > 0) apply_override(cfg, key.flag, values.at(key.flag));
    }
    return cfg;
  }
};

std::vector<std::string> extra_vocabulary(const std::string& lexicon_path,
                                          const std::string& swap_path) {
  const auto lexicon = lexicon_path.empty() ? textcf::SynonymLexicon::defaults()
                                            : textcf::SynonymLexicon::load_tsv(lexicon_path);
  const auto swaps = swap_path.empty() ? textcf::SwapTable::defaults()
                                       : textcf::SwapTable::load_tsv(swap_path);
  auto words = lexicon.vocabulary();
  for (const auto& [word, image] : swaps.entries()) words.push_back(word);
  words.emplace_back(textcf::kMaskToken);
  return words;
}

synthgen::Dataset load_dataset(const TrainConfig& cfg) {
  if (cfg.paths.dataset.empty()) throw ConfigError("no dataset given (--dataset DIR)");
  return synthgen::read_dataset(cfg.paths.dataset);
}

Checkpoint load_input_checkpoint(const TrainConfig& cfg) {
  if (cfg.paths.checkpoint_in.empty()) throw ConfigError("no checkpoint given (--checkpoint)");
  return load_checkpoint(cfg.paths.checkpoint_in);
}

fs::path final_metrics_path(const std::string& metrics_out) {
  fs::path p(metrics_out);
  p.replace_extension(".final.json");
  return p;
}

std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path.empty()) return nullptr;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto out = std::make_unique<std::ofstream>(p, std::ios::trunc);
  if (!*out) throw InputError("cannot write " + path);
  return out;
}

json run_training(const synthgen::Dataset& ds, const TrainConfig& cfg) {
  auto metrics = open_output(cfg.paths.metrics_out);
  const TrainResult result = train(ds, cfg, metrics.get());
  json epochs = json::array();
  for (const auto& e : result.epochs) epochs.push_back(to_json(e));
  json final = {{"config", to_json(cfg)},
                {"epochs", epochs},
                {"train_metrics", to_json(evaluate(ds, result.checkpoint))}};
  if (!cfg.paths.metrics_out.empty()) {
    std::ofstream(final_metrics_path(cfg.paths.metrics_out), std::ios::trunc)
        << final.dump(1) << '\n';
  }
  return final;
}

// ---- subcommands -----------------------------------------------------------

struct GenDataArgs {
  std::string out;
  std::size_t train = 2000;
  std::size_t test = 500;
  std::uint64_t seed = 0;
  std::size_t per_episode = 4;
  std::size_t min_events = 3;
  std::size_t max_events = 5;
  std::string lexicon, swap_table;
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  const synthgen::WorldSpec world;
  const auto extra = extra_vocabulary(a.lexicon, a.swap_table);
  json summary = json::object();
  const std::pair<const char*, std::size_t> splits[] = {{"train", a.train}, {"test", a.test}};
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& [name, count] = splits[s];
    synthgen::GenerationOptions o;
    o.num_records = count;
    o.questions_per_episode = a.per_episode;
    o.min_events = a.min_events;
    o.max_events = a.max_events;
    o.seed = numkit::Rng::derive_seed(a.seed, {s});
    o.id_prefix = name;
    const auto ds = synthgen::generate_dataset(world, o, extra);
    synthgen::write_dataset(ds, fs::path(a.out) / name);
    summary[name] = {{"records", ds.records.size()}, {"videos", ds.videos.size()}};
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

struct AugmentTextArgs {
  std::string in, out, variant = "f_q3", lexicon, swap_table;
  std::uint64_t seed = 0;
};

int augment_text(const AugmentTextArgs& a, std::ostream& out) {
  const auto variant = textcf::parse_text_variant(a.variant);
  const synthgen::WorldSpec world;
  textcf::TextResources res;
  res.vocabulary = textcf::make_event_vocabulary(world.verbs, world.objects);
  res.lexicon = a.lexicon.empty() ? textcf::SynonymLexicon::defaults()
                                  : textcf::SynonymLexicon::load_tsv(a.lexicon);
  res.swaps = a.swap_table.empty() ? textcf::SwapTable::defaults()
                                   : textcf::SwapTable::load_tsv(a.swap_table);
  std::ifstream in(a.in);
  if (!in) throw InputError("cannot open " + a.in);
  auto file = open_output(a.out);
  std::ostream& dst = file ? *file : out;
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    textcf::QuestionRecord q;
    const json j = json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("question_tokens")) {
      q = textcf::with_tokens({}, j.at("question_tokens").get<textcf::Tokens>());
    } else if (j.is_object() && j.contains("question")) {
      q = textcf::make_question(j.at("question").get<std::string>());
    } else {
      q = textcf::make_question(line);
    }
    if (j.is_object()) {
      q.answer_label = j.value("answer_label", std::size_t{0});
      q.category = j.value("category", std::string());
    }
    numkit::Rng rng(numkit::Rng::derive_seed(a.seed, {index++}));
    dst << to_json(textcf::make_question_triple(q, variant, res, rng)).dump() << '\n';
  }
  return kExitOk;
}

struct AugmentVideoArgs {
  std::string dataset, variant = "f_v1", video_id, bboxes, out;
  double fill = 0.0;
};

int augment_video(const AugmentVideoArgs& a, std::ostream& out) {
  const auto variant = videocf::parse_video_variant(a.variant);
  const auto ds = synthgen::read_dataset(a.dataset);
  if (ds.videos.empty()) throw InputError("dataset has no videos");
  const std::string id = a.video_id.empty() ? ds.videos.begin()->first : a.video_id;
  const auto& video = ds.video(id);
  videocf::BBoxIndex boxes = a.bboxes.empty() ? ds.bboxes : videocf::read_bboxes(a.bboxes);
  std::optional<std::span<const videocf::BBoxRecord>> span;
  if (variant == videocf::VideoVariant::kFv4) {
    auto it = boxes.find(id);
    if (it == boxes.end()) throw ConfigError("f_v4 needs boxes for video " + id);
    span = std::span<const videocf::BBoxRecord>(it->second);
  }
  const auto pair = videocf::make_video_pair(video, variant, span, a.fill);
  json fractions = json::array();
  const double area = static_cast<double>(video.height() * video.width());
  for (std::size_t n = 0; n < video.frames(); ++n) {
    fractions.push_back(static_cast<double>(videocf::selected_pixels(pair.region, n)) / area);
  }
  if (!a.out.empty()) {
    numkit::TensorArchive archive;
    archive.tensors.emplace("original", video.tensor());
    archive.tensors.emplace("positive", pair.positive.tensor());
    archive.tensors.emplace("negative", pair.negative.tensor());
    archive.meta = {{"video_id", id}, {"variant", a.variant}, {"fill", a.fill}};
    numkit::write_archive(a.out, archive);
  }
  out << json{{"video_id", id}, {"variant", a.variant}, {"area_fraction", fractions}}.dump()
      << '\n';
  return kExitOk;
}

struct GradcheckArgs {
  std::size_t samples = 3;
  std::uint64_t seed = 0;
  double eps = 1e-3;
  std::size_t coords = 24;
  bool full = false;
};

int gradcheck(const GradcheckArgs& a, std::ostream& out) {
  ObjectiveCheckOptions o;
  o.samples = a.samples;
  o.seed = a.seed;
  o.eps = a.eps;
  o.coords_per_tensor = a.coords;
  o.full_sweep = a.full;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = check_objective_gradients(o);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = r.report.max_rel_error <= kGradTolerance;
  out << json{{"samples", r.samples},
              {"usable", r.usable},
              {"tensors", r.tensors},
              {"coords_checked", r.report.coords_checked},
              {"max_rel_error", r.report.max_rel_error},
              {"worst_param", r.report.worst_param},
              {"worst_index", r.report.worst_index},
              {"tolerance", kGradTolerance},
              {"seconds", seconds},
              {"pass", ok}}
             .dump()
      << '\n';
  return ok ? kExitOk : kExitRuntime;
}

struct AblateArgs {
  std::string out_dir = "ablation";
  std::string test_dataset;
  std::size_t stage1_epochs = 0;
};

int ablate(const TrainConfig& base, const AblateArgs& a, std::ostream& out) {
  const auto train_ds = load_dataset(base);
  std::optional<synthgen::Dataset> test_ds;
  if (!a.test_dataset.empty()) test_ds = synthgen::read_dataset(a.test_dataset);
  fs::create_directories(a.out_dir);

  Checkpoint stage1;
  if (!base.paths.checkpoint_in.empty()) {
    stage1 = load_checkpoint(base.paths.checkpoint_in);
  } else {
    TrainConfig c1 = base;
    c1.stage = 1;
    c1.epochs = a.stage1_epochs;
    c1.paths.checkpoint_out = (fs::path(a.out_dir) / "stage1.ckpt").string();
    c1.paths.metrics_out = (fs::path(a.out_dir) / "stage1.metrics.jsonl").string();
    auto metrics = open_output(c1.paths.metrics_out);
    stage1 = train_stage1(train_ds, c1, metrics.get()).checkpoint;
  }

  static constexpr const char* kText[] = {"f_q1", "f_q2", "f_q3"};
  static constexpr const char* kVideo[] = {"f_v1", "f_v2", "f_v3", "f_v4"};
  json rows = json::array();
  std::ostringstream table;
  table << "| text | video | test_acc | train_acc | audit_fraction | l_con_first | l_con_last |\n"
        << "|------|-------|----------|-----------|----------------|-------------|------------|\n";
  for (const char* tq : kText) {
    for (const char* tv : kVideo) {
      TrainConfig c = base;
      c.stage = 2;
      c.text_variant = textcf::parse_text_variant(tq);
      c.video_variant = videocf::parse_video_variant(tv);
      const fs::path dir = fs::path(a.out_dir) / (std::string(tq) + "_" + tv);
      fs::create_directories(dir);
      c.paths.checkpoint_in = "<stage1>";
      c.paths.checkpoint_out = (dir / "checkpoint.ckpt").string();
      c.paths.metrics_out = (dir / "metrics.jsonl").string();
      auto metrics = open_output(c.paths.metrics_out);
      const auto result = train_stage2(train_ds, c, stage1, metrics.get());
      const auto train_metrics = evaluate(train_ds, result.checkpoint);
      const double test_acc =
          test_ds ? evaluate(*test_ds, result.checkpoint).accuracy_all : train_metrics.accuracy_all;
      const auto audit = similarity_audit(train_ds, result.checkpoint, c);
      const double con_first = result.epochs.front().mean.l_con;
      const double con_last = result.epochs.back().mean.l_con;
      rows.push_back({{"text_variant", tq},
                      {"video_variant", tv},
                      {"test_accuracy", test_acc},
                      {"train_accuracy", train_metrics.accuracy_all},
                      {"audit_fraction", audit.fraction_positive},
                      {"l_con_first", con_first},
                      {"l_con_last", con_last}});
      table << "| " << tq << " | " << tv << std::fixed << std::setprecision(4) << " | "
            << test_acc << " | " << train_metrics.accuracy_all << " | "
            << audit.fraction_positive << " | " << con_first << " | " << con_last << " |\n";
    }
  }
  std::ofstream(fs::path(a.out_dir) / "ablation.json", std::ios::trunc)
      << json{{"config", to_json(base)}, {"runs", rows}}.dump(1) << '\n';
  std::ofstream(fs::path(a.out_dir) / "ablation.md", std::ios::trunc) << table.str();
  out << table.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counterfactual contrastive VideoQA toolkit", "egocf"};
  app.require_subcommand(0, 1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic train/test benchmark");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--train", gen.train, "Training records");
  gen_cmd->add_option("--test", gen.test, "Test records");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--questions-per-episode", gen.per_episode);
  gen_cmd->add_option("--min-events", gen.min_events);
  gen_cmd->add_option("--max-events", gen.max_events);
  gen_cmd->add_option("--lexicon", gen.lexicon);
  gen_cmd->add_option("--swap-table", gen.swap_table);

  AugmentTextArgs at;
  auto* at_cmd = app.add_subcommand("augment-text", "Emit one question triple per input line");
  at_cmd->add_option("--in", at.in, "Questions, one per line (text or JSON)")->required();
  at_cmd->add_option("--out", at.out, "Output JSONL (default: stdout)");
  at_cmd->add_option("--variant", at.variant, "f_q1 | f_q2 | f_q3");
  at_cmd->add_option("--seed", at.seed);
  at_cmd->add_option("--lexicon", at.lexicon);
  at_cmd->add_option("--swap-table", at.swap_table);

  AugmentVideoArgs av;
  auto* av_cmd = app.add_subcommand("augment-video", "Build the retain/mask pair for one clip");
  av_cmd->add_option("--dataset", av.dataset, "Dataset split directory")->required();
  av_cmd->add_option("--variant", av.variant, "f_v1 | f_v2 | f_v3 | f_v4");
  av_cmd->add_option("--video-id", av.video_id);
  av_cmd->add_option("--bboxes", av.bboxes, "Box JSONL (default: the dataset's)");
  av_cmd->add_option("--fill", av.fill);
  av_cmd->add_option("--out", av.out, "Tensor archive with original/positive/negative");

  ConfigOptions train_opts, eval_opts, audit_opts, ablate_opts;
  auto* train_cmd = app.add_subcommand("train", "Run stage 1 or stage 2 training");
  train_opts.attach(train_cmd);

  std::string eval_out;
  bool eval_audit = false;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and ROUGE-L of a checkpoint");
  eval_opts.attach(eval_cmd);
  eval_cmd->add_option("--out", eval_out, "Write the Metrics JSON here");
  eval_cmd->add_flag("--with-audit", eval_audit, "Include similarity-margin statistics");

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the objective");
  gc_cmd->add_option("--samples", gc.samples);
  gc_cmd->add_option("--seed", gc.seed);
  gc_cmd->add_option("--eps", gc.eps);
  gc_cmd->add_option("--coords", gc.coords, "Coordinates per tensor");
  gc_cmd->add_flag("--full", gc.full, "Check every coordinate");

  bool audit_margins = false;
  auto* audit_cmd = app.add_subcommand("audit", "Similarity-margin audit of a checkpoint");
  audit_opts.attach(audit_cmd);
  audit_cmd->add_flag("--margins", audit_margins, "Print every margin");

  AblateArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Stage 2 over all 12 variant pairs");
  ablate_opts.attach(ablate_cmd);
  ablate_cmd->add_option("--out-dir", ab.out_dir);
  ablate_cmd->add_option("--test-dataset", ab.test_dataset);
  ablate_cmd->add_option("--stage1-epochs", ab.stage1_epochs,
                         "Stage-1 epochs when no checkpoint is given (0: default)");

  std::vector<const char*> argv{"egocf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return gen_data(gen, out);
    if (at_cmd->parsed()) return augment_text(at, out);
    if (av_cmd->parsed()) return augment_video(av, out);
    if (gc_cmd->parsed()) return gradcheck(gc, out);
    if (train_cmd->parsed()) {
      const auto cfg = train_opts.resolve(train_cmd);
      cfg.validate();
      out << run_training(load_dataset(cfg), cfg).dump() << '\n';
      return kExitOk;
    }
    if (eval_cmd->parsed()) {
      const auto cfg = eval_opts.resolve(eval_cmd);
      const auto ds = load_dataset(cfg);
      const auto ckpt = load_input_checkpoint(cfg);
      auto metrics = evaluate(ds, ckpt);
      if (eval_audit) metrics.similarity_margin = similarity_audit(ds, ckpt, cfg);
      const auto j = to_json(metrics);
      if (!eval_out.empty()) *open_output(eval_out) << j.dump(1) << '\n';
      out << j.dump() << '\n';
      return kExitOk;
    }
    if (audit_cmd->parsed()) {
      const auto cfg = audit_opts.resolve(audit_cmd);
      const auto stats = similarity_audit(load_dataset(cfg), load_input_checkpoint(cfg), cfg);
      out << to_json(stats, audit_margins).dump() << '\n';
      return kExitOk;
    }
    if (ablate_cmd->parsed()) return ablate(ablate_opts.resolve(ablate_cmd), ab, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace egocf::trainkit
