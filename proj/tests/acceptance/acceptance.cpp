// Acceptance harness: one PASS/FAIL line per criterion.
//   acceptance [--work-dir DIR] [--only 1,2,...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/losses/losses.hpp"
#include "egocf/numkit/rng.hpp"
#include "egocf/synthgen/dataset.hpp"
#include "egocf/textcf/events.hpp"
#include "egocf/textcf/lexicon.hpp"
#include "egocf/textcf/transforms.hpp"
#include "egocf/trainkit/cli.hpp"
#include "egocf/trainkit/evaluate.hpp"
#include "egocf/trainkit/gradcheck.hpp"
#include "egocf/trainkit/rouge.hpp"
#include "egocf/trainkit/trainer.hpp"
#include "egocf/videocf/region.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace egocf;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs the CLI in-process; any non-zero exit aborts the criterion.
std::string cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = trainkit::run_cli(args, out, err);
  if (code != 0) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    throw std::runtime_error("egocf " + joined + "exited " + std::to_string(code) + ": " +
                             err.str());
  }
  return out.str();
}

std::vector<json> epoch_rows(const fs::path& metrics) {
  std::vector<json> rows;
  std::ifstream in(metrics);
  std::string line;
  while (std::getline(in, line)) {
    auto j = json::parse(line);
    if (j.value("kind", "") == "epoch") rows.push_back(std::move(j));
  }
  return rows;
}

// ---------------------------------------------------------------------------

Outcome gradient_integrity() {
  trainkit::ObjectiveCheckOptions o;
  o.samples = 3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = trainkit::check_objective_gradients(o);
  const double secs = seconds_since(t0);
  const bool every = r.report.per_param_max.size() == r.tensors && r.tensors > 0;
  return {r.samples >= 3 && every && r.report.max_rel_error <= 1e-4 && secs <= 60.0,
          "samples=" + std::to_string(r.samples) + " tensors=" + std::to_string(r.tensors) +
              " max_rel_err=" + fmt("%.3g", r.report.max_rel_error) + " time=" +
              fmt("%.1fs", secs)};
}

Outcome loss_identities() {
  numkit::Rng rng(1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double tau = 0.01 + 2 * rng.uniform();
    const double a = rng.uniform(-3, 3);
    const double theta = rng.uniform(-3, 3);
    // Anchor at angle theta; the two candidates mirror each other about it.
    const std::vector<double> p{std::cos(theta), std::sin(theta)};
    const std::vector<double> x{std::cos(theta + a), std::sin(theta + a)};
    const std::vector<double> y{std::cos(theta - a), std::sin(theta - a)};
    worst = std::max(worst, std::abs(losses::loss_con(p, x, y, tau) - std::log(2.0)));
  }
  const double closed = losses::loss_con(std::vector<double>{1, 0}, std::vector<double>{1, 0},
                                         std::vector<double>{0, 1}, 0.1);
  const double err = std::abs(closed - std::log1p(std::exp(-10.0)));
  return {worst <= 1e-9 && err <= 1e-9,
          "max|L-ln2|=" + fmt("%.2e", worst) + " closed_form_err=" + fmt("%.2e", err)};
}

Outcome text_suite() {
  const synthgen::WorldSpec world;
  synthgen::GenerationOptions o;
  o.num_records = 1000;
  o.seed = 11;
  const auto ds = synthgen::generate_dataset(world, o);
  textcf::TextResources res{textcf::make_event_vocabulary(world.verbs, world.objects),
                            textcf::SynonymLexicon::defaults(), textcf::SwapTable::defaults()};
  std::size_t neg_ok = 0, markers_total = 0, markers_ok = 0, pos_ok = 0, involution_ok = 0;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto q = textcf::with_tokens({}, ds.records[i].question);
    numkit::Rng rng(numkit::Rng::derive_seed(o.seed, {i}));
    const auto t = textcf::make_question_triple(q, textcf::TextVariant::kFq3, res, rng);
    const auto spans = textcf::detect_events(q, res.vocabulary);
    ++checked;

    // Negative: tokens outside spans, markers mapped to their images, one
    // [MASK] per span and nothing else.
    std::vector<bool> in_span(q.tokens.size(), false);
    for (const auto& s : spans)
      for (std::size_t k = s.start; k < s.end; ++k) in_span[k] = true;
    textcf::Tokens expected_rest, got_rest;
    for (std::size_t k = 0; k < q.tokens.size(); ++k) {
      if (in_span[k]) continue;
      const auto& w = q.tokens[k];
      if (res.swaps.contains(w)) {
        ++markers_total;
      }
      expected_rest.push_back(res.swaps.contains(w) ? res.swaps.image(w) : w);
    }
    std::size_t masks = 0;
    for (const auto& w : t.negative.tokens) {
      if (w == textcf::kMaskToken) ++masks;
      else got_rest.push_back(w);
    }
    bool no_survivors = masks == spans.size() && got_rest.size() == expected_rest.size();
    if (no_survivors) {
      std::size_t k = 0;
      for (std::size_t j = 0; j < q.tokens.size(); ++j) {
        if (in_span[j]) continue;
        const auto& w = q.tokens[j];
        if (res.swaps.contains(w)) markers_ok += got_rest[k] == res.swaps.image(w);
        no_survivors &= got_rest[k] == expected_rest[k];
        ++k;
      }
    }
    neg_ok += no_survivors;

    // Positive: undo every edit through the lexicon and recover the original.
    bool pos = true;
    textcf::Tokens rebuilt;
    std::size_t src = 0, dst = 0;
    for (const auto& e : t.positive_edits) {
      const textcf::Tokens target(t.positive.tokens.begin() + e.target_begin,
                                  t.positive.tokens.begin() + e.target_end);
      const auto g_to = res.lexicon.group_of(target);
      const auto g_from = res.lexicon.group_of(e.from);
      pos &= g_to && g_from && *g_to == *g_from && target != e.from;
      pos &= e.target_begin - dst == e.source_begin - src;
      rebuilt.insert(rebuilt.end(), t.positive.tokens.begin() + dst,
                     t.positive.tokens.begin() + e.target_begin);
      rebuilt.insert(rebuilt.end(), e.from.begin(), e.from.end());
      src = e.source_end;
      dst = e.target_end;
    }
    rebuilt.insert(rebuilt.end(), t.positive.tokens.begin() + dst, t.positive.tokens.end());
    pos_ok += pos && rebuilt == q.tokens;

    bool inv = true;
    for (const auto* r : {&t.original, &t.positive, &t.negative}) {
      const auto once = textcf::swap_temporal(*r, textcf::detect_temporal_markers(*r, res.swaps),
                                              res.swaps);
      const auto twice = textcf::swap_temporal(
          once, textcf::detect_temporal_markers(once, res.swaps), res.swaps);
      inv &= twice.tokens == r->tokens;
    }
    involution_ok += inv;
  }
  const bool pass = neg_ok == checked && markers_ok == markers_total && pos_ok == checked &&
                    involution_ok == checked;
  return {pass, "questions=" + std::to_string(checked) + " neg_clean=" + std::to_string(neg_ok) +
                    " markers_swapped=" + std::to_string(markers_ok) + "/" +
                    std::to_string(markers_total) + " pos_verified=" + std::to_string(pos_ok) +
                    " involution=" + std::to_string(involution_ok)};
}

Outcome video_suite() {
  numkit::Rng rng(4);
  const videocf::VideoVariant variants[] = {videocf::VideoVariant::kFv1,
                                            videocf::VideoVariant::kFv2,
                                            videocf::VideoVariant::kFv3};
  std::size_t exact = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.index(4), c = 1 + rng.index(3);
    const std::size_t h = 4 * (1 + rng.index(16)), w = 4 * (1 + rng.index(16));
    videocf::FrameGrid v(n, c, h, w);
    for (double& x : v.tensor().values()) x = rng.uniform();
    const auto pair = videocf::make_video_pair(v, variants[rng.index(3)], std::nullopt, 0.0);
    bool ok = true;
    for (std::size_t k = 0; k < v.tensor().size(); ++k)
      ok &= pair.positive.tensor()[k] + pair.negative.tensor()[k] == v.tensor()[k];
    exact += ok;
  }
  bool areas = true;
  std::string detail;
  for (std::size_t hw : {64u, 224u}) {
    const std::pair<videocf::VideoVariant, double> targets[] = {
        {videocf::VideoVariant::kFv1, 0.25},
        {videocf::VideoVariant::kFv2, 0.25},
        {videocf::VideoVariant::kFv3, 0.375}};
    for (const auto& [variant, frac] : targets) {
      const auto region = videocf::select_region(variant, hw, hw, 2);
      const auto mask = videocf::region_mask(region, 0);
      std::size_t ones = 0;
      for (auto m : mask) ones += m;
      areas &= static_cast<double>(ones) == frac * hw * hw;
    }
  }
  return {exact == 100 && areas,
          "complementary=" + std::to_string(exact) + "/100 area_fractions=" +
              (areas ? "exact" : "off")};
}

Outcome overfit(const fs::path& work) {
  const auto dir = work / "overfit";
  fs::create_directories(dir);
  cli({"gen-data", "--out", (dir / "data").string(), "--train", "64", "--test", "1", "--seed",
       "5"});
  const auto t0 = std::chrono::steady_clock::now();
  cli({"train", "--dataset", (dir / "data" / "train").string(), "--epochs", "200",
       "--checkpoint_out", (dir / "s1.ckpt").string(), "--metrics_out",
       (dir / "s1.jsonl").string()});
  const double secs = seconds_since(t0);
  const auto rows = epoch_rows(dir / "s1.jsonl");
  std::size_t first_perfect = 0;
  for (const auto& r : rows) {
    if (r["accuracy"].get<double>() == 1.0) {
      first_perfect = r["epoch"].get<std::size_t>();
      break;
    }
  }
  const auto ds = synthgen::read_dataset(dir / "data" / "train");
  const auto final_acc =
      trainkit::evaluate(ds, trainkit::load_checkpoint(dir / "s1.ckpt")).accuracy_all;
  return {final_acc == 1.0 && first_perfect > 0 && secs <= 300.0,
          "records=" + std::to_string(ds.records.size()) + " first_100%_epoch=" +
              std::to_string(first_perfect) + " final_train_acc=" + fmt("%.4f", final_acc) +
              " time=" + fmt("%.0fs", secs)};
}

// Default two-stage run on the 2000/500 benchmark for one seed.
struct SeedRun {
  double stage1_test = 0;
  double stage2_test = 0;
  double audit_fraction = 0;
  double l_con_first = 0;
  double l_con_last = 0;
};

SeedRun default_run(const fs::path& work, std::uint64_t seed) {
  const auto dir = work / ("seed" + std::to_string(seed));
  fs::create_directories(dir);
  const auto s = std::to_string(seed);
  cli({"gen-data", "--out", (dir / "data").string(), "--seed", s});
  const auto train = (dir / "data" / "train").string();
  cli({"train", "--dataset", train, "--seed", s, "--checkpoint_out", (dir / "s1.ckpt").string(),
       "--metrics_out", (dir / "s1.jsonl").string()});
  cli({"train", "--stage", "2", "--dataset", train, "--seed", s, "--checkpoint",
       (dir / "s1.ckpt").string(), "--checkpoint_out", (dir / "s2.ckpt").string(),
       "--metrics_out", (dir / "s2.jsonl").string()});
  const auto train_ds = synthgen::read_dataset(train);
  const auto test_ds = synthgen::read_dataset(dir / "data" / "test");
  const auto s1 = trainkit::load_checkpoint(dir / "s1.ckpt");
  const auto s2 = trainkit::load_checkpoint(dir / "s2.ckpt");
  trainkit::TrainConfig cfg;
  cfg.seed = seed;
  SeedRun r;
  r.stage1_test = trainkit::evaluate(test_ds, s1).accuracy_all;
  r.stage2_test = trainkit::evaluate(test_ds, s2).accuracy_all;
  r.audit_fraction = trainkit::similarity_audit(train_ds, s2, cfg).fraction_positive;
  const auto rows = epoch_rows(dir / "s2.jsonl");
  r.l_con_first = rows.front()["l_con"].get<double>();
  r.l_con_last = rows.back()["l_con"].get<double>();
  std::cout << "  seed " << seed << ": stage1_test=" << fmt("%.4f", r.stage1_test)
            << " stage2_test=" << fmt("%.4f", r.stage2_test)
            << " audit=" << fmt("%.4f", r.audit_fraction)
            << " l_con epoch1=" << fmt("%.4f", r.l_con_first)
            << " epoch5=" << fmt("%.4f", r.l_con_last) << std::endl;
  return r;
}

Outcome contrastive_effect(const SeedRun& r) {
  return {r.audit_fraction >= 0.9 && r.l_con_last < r.l_con_first,
          "seed0 audit_fraction=" + fmt("%.4f", r.audit_fraction) + " l_con epoch1=" +
              fmt("%.4f", r.l_con_first) + " epoch5=" + fmt("%.4f", r.l_con_last)};
}

Outcome non_degradation(const std::vector<SeedRun>& runs) {
  double s1 = 0, s2 = 0;
  for (const auto& r : runs) {
    s1 += r.stage1_test / runs.size();
    s2 += r.stage2_test / runs.size();
  }
  const double delta_pp = 100.0 * (s2 - s1);
  return {runs.size() == 3 && delta_pp >= -1.0,
          "seeds=" + std::to_string(runs.size()) + " stage1_mean=" + fmt("%.4f", s1) +
              " stage2_mean=" + fmt("%.4f", s2) + " delta=" + fmt("%+.2fpp", delta_pp)};
}

Outcome ablation(const fs::path& work) {
  const auto dir = work / "ablation";
  fs::create_directories(dir);
  cli({"gen-data", "--out", (dir / "data").string(), "--train", "64", "--test", "32", "--seed",
       "8"});
  std::string tables[2];
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("run" + std::to_string(run));
    tables[run] = cli({"ablate", "--dataset", (dir / "data" / "train").string(),
                       "--test-dataset", (dir / "data" / "test").string(), "--out-dir",
                       out.string(), "--stage1-epochs", "2", "--epochs", "1", "--seed", "8"});
  }
  const auto runs = json::parse(slurp(dir / "run0" / "ablation.json"))["runs"];
  std::set<std::string> pairs;
  for (const auto& r : runs)
    pairs.insert(r["text_variant"].get<std::string>() + "+" + r["video_variant"].get<std::string>());
  bool same_bytes = tables[0] == tables[1] &&
                    slurp(dir / "run0" / "ablation.json") == slurp(dir / "run1" / "ablation.json");
  for (const auto& p : fs::directory_iterator(dir / "run0")) {
    if (!p.is_directory()) continue;
    const auto name = p.path().filename();
    for (const char* f : {"checkpoint.ckpt", "metrics.jsonl"})
      same_bytes &= slurp(p.path() / f) == slurp(dir / "run1" / name / f);
  }
  std::size_t table_rows = 0;
  std::istringstream t(tables[0]);
  std::string line;
  while (std::getline(t, line)) table_rows += line.rfind("| f_q", 0) == 0;
  std::cout << tables[0];
  return {pairs.size() == 12 && table_rows == 12 && same_bytes,
          "combinations=" + std::to_string(pairs.size()) + " table_rows=" +
              std::to_string(table_rows) + " deterministic=" + (same_bytes ? "yes" : "no")};
}

Outcome rouge() {
  const auto r = trainkit::rouge_l({"the", "cat"}, {"the", "cat", "sat"});
  const bool ok = std::abs(r.precision - 1.0) <= 1e-4 && std::abs(r.recall - 0.6667) <= 1e-4 &&
                  std::abs(r.f1 - 0.8) <= 1e-4;
  return {ok, "P=" + fmt("%.4f", r.precision) + " R=" + fmt("%.4f", r.recall) + " F1=" +
                  fmt("%.4f", r.f1)};
}

Outcome reproducibility(const fs::path& work) {
  const auto dir = work / "repro";
  fs::create_directories(dir);
  cli({"gen-data", "--out", (dir / "data").string(), "--train", "96", "--test", "8", "--seed",
       "6"});
  const auto train = (dir / "data" / "train").string();
  const auto run_dir = dir / "run";
  std::vector<std::string> captured[2];
  const char* files[] = {"s1.ckpt", "s1.jsonl", "s1.final.json", "s2.ckpt", "s2.jsonl",
                         "s2.final.json"};
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(run_dir);
    fs::create_directories(run_dir);
    cli({"train", "--dataset", train, "--epochs", "2", "--seed", "6", "--checkpoint_out",
         (run_dir / "s1.ckpt").string(), "--metrics_out", (run_dir / "s1.jsonl").string()});
    cli({"train", "--stage", "2", "--dataset", train, "--epochs", "2", "--seed", "6",
         "--checkpoint", (run_dir / "s1.ckpt").string(), "--checkpoint_out",
         (run_dir / "s2.ckpt").string(), "--metrics_out", (run_dir / "s2.jsonl").string()});
    for (const char* f : files) captured[run].push_back(slurp(run_dir / f));
  }
  std::size_t identical = 0;
  for (std::size_t i = 0; i < captured[0].size(); ++i)
    identical += !captured[0][i].empty() && captured[0][i] == captured[1][i];
  return {identical == captured[0].size(),
          "identical_files=" + std::to_string(identical) + "/" +
              std::to_string(captured[0].size())};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "egocf_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: acceptance [--work-dir DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::remove_all(work);
  fs::create_directories(work);
  const auto wanted = [&](int c) { return only.empty() || only.count(c) > 0; };

  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    if (!wanted(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): "
              << o.detail << " [" << fmt("%.0fs", seconds_since(t0)) << "]" << std::endl;
  };

  report(1, "gradient integrity", gradient_integrity);
  report(2, "loss identities", loss_identities);
  report(3, "counterfactual text suite", text_suite);
  report(4, "counterfactual video suite", video_suite);
  report(9, "metric correctness", rouge);
  report(5, "overfit sanity", [&] { return overfit(work); });
  report(8, "ablation plumbing", [&] { return ablation(work); });
  report(10, "reproducibility", [&] { return reproducibility(work); });

  if (wanted(6) || wanted(7)) {
    std::vector<SeedRun> runs;
    std::string error;
    const std::vector<std::uint64_t> seeds =
        wanted(7) ? std::vector<std::uint64_t>{0, 1, 2} : std::vector<std::uint64_t>{0};
    try {
      for (auto s : seeds) runs.push_back(default_run(work, s));
    } catch (const std::exception& e) {
      error = e.what();
    }
    const auto guarded = [&](auto fn) {
      return [&, fn] {
        if (!error.empty()) return Outcome{false, "exception: " + error};
        return fn();
      };
    };
    report(6, "contrastive effect", guarded([&] { return contrastive_effect(runs.front()); }));
    report(7, "non-degradation", guarded([&] { return non_degradation(runs); }));
  }
  return failures == 0 ? 0 : 1;
}
