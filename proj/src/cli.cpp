// Copyright 2026 The bwv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bwv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "bwv/annotator.hpp"
#include "bwv/augment.hpp"
#include "bwv/dataset.hpp"
#include "bwv/error.hpp"
#include "bwv/lime.hpp"
#include "bwv/metrics.hpp"
#include "bwv/network.hpp"
#include "bwv/parallel.hpp"
#include "bwv/synth.hpp"
#include "bwv/trainer.hpp"

namespace bwv::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  bool quiet = false;
};

struct AnnotateArgs {
  std::string input_dir, out, overlay_dir, labels;
  ColorRange range;
  ScanOptions scan;
};

struct IngestArgs {
  std::string input_dir, labels, out;
};

struct AugmentArgs {
  std::string manifest, out_dir, out_manifest;
  double zoom = 1.25;
};

struct SplitArgs {
  std::string manifest, out;
  SplitPlan plan;
  bool keep_groups = true;
};

struct TrainArgs {
  std::string manifest, activation = "prelu", out = "model.bwvnet", history;
  TrainConfig cfg;
  bool keep_groups = true;
};

struct EvalArgs {
  std::string model, manifest, out, predictions, split = "all", dataset, approach;
};

struct ExplainArgs {
  std::string model, image, cls = "bwv", out_heatmap, out_mask, out_json;
  ExplainConfig cfg;
  std::size_t top_k = 4;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::vector<std::uint64_t> confusion;
};

struct SynthArgs {
  std::string out_dir;
  SynthOptions opts;
};

class Logger {
 public:
  Logger(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  template <typename... Parts>
  void info(const Parts&... parts) {
    if (quiet_) return;
    (err_ << ... << parts) << '\n';
  }

 private:
  std::ostream& err_;
  bool quiet_;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Label parse_label_or_throw(const std::string& token) {
  const auto label = parse_label(token);
  if (!label) throw InvalidInput("unknown class '" + token + "' (expected bwv or nonbwv)");
  return *label;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("input directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------

int cmd_annotate(const AnnotateArgs& a, std::ostream& out, Logger& log) {
  a.range.validate();
  if (a.scan.patch_size == 0) throw InvalidInput("--patch must be positive");
  const auto files = list_images(a.input_dir);
  if (files.empty()) throw DataError("no images found in " + a.input_dir);

  if (!a.overlay_dir.empty()) fs::create_directories(a.overlay_dir);
  std::vector<AnnotationResult> results(files.size());
  std::vector<std::string> failures(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    try {
      const ImageRGB8 img = read_image(files[i]);
      results[i] = classify_image(img, a.range, a.scan);
      if (!a.overlay_dir.empty()) {
        write_png(render_overlay(img, results[i].grid),
                  fs::path(a.overlay_dir) / (files[i].stem().string() + ".png"));
      }
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  std::vector<std::string> problems;
  for (const auto& f : failures) {
    if (!f.empty()) problems.push_back(f);
  }
  if (!problems.empty()) throw DataError("annotation failed", problems);

  const fs::path out_path(a.out);
  const fs::path base = out_path.parent_path();
  std::string text;
  std::size_t bwv = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& r = results[i];
    json j;
    j["path"] = relative_path_string(files[i], base);
    j["label"] = std::string(to_string(r.label));
    json patches = json::array();
    for (const auto& [row, col] : r.grid.flagged_patches()) patches.push_back({row, col});
    j["flagged_patches"] = patches;
    if (r.rgb_extrema) {
      const auto& x = *r.rgb_extrema;
      j["rgb_extrema"] = {{"r", {x.min[0], x.max[0]}}, {"g", {x.min[1], x.max[1]}},
                          {"b", {x.min[2], x.max[2]}}};
    } else {
      j["rgb_extrema"] = nullptr;
    }
    text += j.dump() + '\n';
    bwv += r.label == Label::Bwv;
  }
  write_text(out_path, text);
  out << "annotated " << files.size() << " images: " << bwv << " bwv, " << files.size() - bwv
      << " nonbwv\n";

  if (!a.labels.empty()) {
    const IngestResult ref = ingest(a.input_dir, a.labels);
    std::map<std::string, Label> by_stem;
    for (const auto& e : ref.manifest.entries) by_stem[e.path.stem().string()] = e.label;
    std::vector<Label> predicted, reference;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto it = by_stem.find(files[i].stem().string());
      if (it == by_stem.end()) continue;
      predicted.push_back(results[i].label);
      reference.push_back(it->second);
    }
    if (!predicted.empty()) {
      const ConfusionMatrix cm = score_agreement(predicted, reference);
      const MetricReport m = compute_metrics(cm);
      out << "agreement TP=" << cm.tp << " FP=" << cm.fp << " FN=" << cm.fn << " TN=" << cm.tn
          << "\nAC PR SE F1 SP AUC\n" << format_row(m) << '\n';
    }
  }
  log.info("wrote ", a.out);
  return kOk;
}

int cmd_ingest(const IngestArgs& a, std::ostream& out, Logger& log) {
  const IngestResult r = ingest(a.input_dir, a.labels);
  if (r.manifest.empty()) throw DataError("no images found in " + a.input_dir);
  for (const auto& w : r.warnings) log.info("warning: ", w);
  write_manifest(r.manifest, a.out);
  out << "ingested " << r.manifest.size() << " images: " << r.manifest.count(Label::Bwv)
      << " bwv, " << r.manifest.count(Label::NonBwv) << " nonbwv\n";
  return kOk;
}

int cmd_augment(const AugmentArgs& a, std::ostream& out, Logger& log) {
  const DatasetManifest in = read_manifest(a.manifest);
  const DatasetManifest result = augment_dataset(in, {a.out_dir, a.zoom});
  write_manifest(result, a.out_manifest);
  out << "augmented " << in.size() << " -> " << result.size() << " entries\n";
  log.info("wrote ", a.out_manifest);
  return kOk;
}

int cmd_split(SplitArgs a, std::ostream& out, Logger& log, std::uint64_t seed) {
  a.plan.seed = seed;
  a.plan.keep_groups = a.keep_groups;
  const DatasetManifest result = split(read_manifest(a.manifest), a.plan);
  const std::string dest = a.out.empty() ? a.manifest : a.out;
  write_manifest(result, dest);
  out << "split " << result.size() << " entries: train " << result.count(Split::Train) << ", val "
      << result.count(Split::Val) << ", test " << result.count(Split::Test) << '\n';
  log.info("wrote ", dest);
  return kOk;
}

int cmd_train(TrainArgs a, std::ostream& out, Logger& log, std::uint64_t seed) {
  a.cfg.seed = seed;
  a.cfg.validate();
  const auto activation = parse_activation(a.activation);
  if (!activation) throw InvalidInput("unknown activation '" + a.activation + "'");
  const DatasetManifest manifest = read_manifest(a.manifest);

  TrainResult result = [&] {
    if (a.cfg.fold_count >= 2) {
      DatasetManifest pool;
      for (const auto& e : manifest.entries) {
        if (e.split != Split::Test) pool.entries.push_back(e);
      }
      if (pool.empty()) throw DataError("no training entries in " + a.manifest);
      std::vector<std::string> keys;
      if (a.keep_groups) {
        for (const auto& e : pool.entries) keys.push_back(e.group_key());
      }
      CrossValidationResult cv = cross_validate(*activation, manifest_samples(pool), keys, a.cfg);
      for (std::size_t k = 0; k < cv.folds.size(); ++k) {
        log.info("fold ", k + 1, ": best validation accuracy ",
                 fixed(100 * cv.folds[k].best_val_accuracy, 2), "%");
      }
      out << "selected fold " << cv.best_fold + 1 << " of " << cv.folds.size() << '\n';
      return std::move(cv.folds[cv.best_fold]);
    }
    const DatasetManifest tr = manifest.filter(Split::Train), va = manifest.filter(Split::Val);
    if (tr.empty() || va.empty()) {
      throw DataError("--folds 1 needs train and val entries in " + a.manifest);
    }
    return train(Network::build(*activation, a.cfg.seed), manifest_samples(tr),
                 manifest_samples(va), a.cfg);
  }();

  result.best.save(a.out);
  if (!a.history.empty()) write_history_csv(result.history, a.history);
  const auto& h = result.history;
  out << "trained " << h.iterations.size() << " iterations (stop: " << to_string(h.stop)
      << "), best validation accuracy " << fixed(100 * result.best_val_accuracy, 2) << "%\n";
  log.info("wrote ", a.out);
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, Logger& log) {
  const Network net = Network::load(a.model);
  DatasetManifest manifest = read_manifest(a.manifest);
  if (a.split != "all") {
    const auto s = parse_split(a.split);
    if (!s) throw InvalidInput("unknown split '" + a.split + "'");
    manifest = manifest.filter(*s);
  }
  if (manifest.empty()) throw DataError("no entries to evaluate in " + a.manifest);

  const Evaluation ev = evaluate(net, manifest_samples(manifest));
  std::vector<Label> reference;
  for (const auto& e : manifest.entries) reference.push_back(e.label);
  const bool both = manifest.count(Label::Bwv) > 0 && manifest.count(Label::NonBwv) > 0;
  MetricReport m = both ? report(ev.confusion, std::span<const double>(ev.bwv_scores),
                                 std::span<const Label>(reference))
                        : report(ev.confusion);
  if (!both) m.auc.undefined_reason = "only one class present";

  auto cell = [](const Ratio& r) { return r.value ? fixed(100 * *r.value, 2) : std::string(); };
  const std::string dataset = a.dataset.empty() ? fs::path(a.manifest).stem().string() : a.dataset;
  const std::string approach =
      a.approach.empty() ? std::string(to_string(net.spec().activation)) : a.approach;
  std::string csv = "dataset,approach,AC,PR,SE,F1,SP,AUC\n";
  csv += dataset + ',' + approach + ',' + cell(m.ac) + ',' + cell(m.pr) + ',' + cell(m.se) + ',' +
         cell(m.f1) + ',' + cell(m.sp) + ',' + cell(m.auc) + '\n';
  if (!a.out.empty()) write_text(a.out, csv);

  if (!a.predictions.empty()) {
    std::string pred = "id,label,predicted,bwv_score\n";
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      char score[32];
      std::snprintf(score, sizeof score, "%.9g", ev.bwv_scores[i]);
      pred += manifest.entries[i].id + ',' + std::string(to_string(reference[i])) + ',' +
              std::string(to_string(ev.predicted[i])) + ',' + score + '\n';
    }
    write_text(a.predictions, pred);
  }

  const auto& cm = ev.confusion;
  out << "TP=" << cm.tp << " FP=" << cm.fp << " FN=" << cm.fn << " TN=" << cm.tn << '\n'
      << "AC PR SE F1 SP AUC\n" << format_row(m) << '\n';
  for (const auto& note : footnotes(m)) out << "  " << note << '\n';
  if (!a.out.empty()) log.info("wrote ", a.out);
  return kOk;
}

int cmd_explain(ExplainArgs a, std::ostream& out, Logger& log, std::uint64_t seed) {
  a.cfg.seed = seed;
  const Label cls = parse_label_or_throw(a.cls);
  const Network net = Network::load(a.model);
  const ImageRGB8 image = read_image(a.image);
  if (a.top_k < 1 || a.top_k > a.cfg.feature_count) {
    throw InvalidInput("--top-k must lie in [1, --features]");
  }
  const Explanation ex = explain(image, network_scorer(net), cls, a.cfg);

  if (!a.out_heatmap.empty()) {
    if (fs::path(a.out_heatmap).has_parent_path()) {
      fs::create_directories(fs::path(a.out_heatmap).parent_path());
    }
    write_png(render_heatmap(image, ex.heatmap), a.out_heatmap);
  }
  if (!a.out_mask.empty()) {
    if (fs::path(a.out_mask).has_parent_path()) {
      fs::create_directories(fs::path(a.out_mask).parent_path());
    }
    write_png(top_k_mask(image, ex.importance, ex.segmentation, a.top_k), a.out_mask);
  }

  json j;
  j["class"] = std::string(to_string(cls));
  j["probability"] = ex.probability;
  j["grid"] = {ex.segmentation.rows, ex.segmentation.cols};
  j["importance"] = ex.importance;
  const auto order = rank_features(ex.importance);
  j["top_features"] = std::vector<std::size_t>(order.begin(), order.begin() + a.top_k);
  const std::string text = j.dump(2) + '\n';
  if (a.out_json.empty()) {
    out << text;
  } else {
    write_text(a.out_json, text);
    out << to_string(cls) << " probability " << fixed(100 * ex.probability, 2) << "%\n";
  }
  log.info("explained ", a.image, " with ", a.cfg.sample_count, " samples");
  return kOk;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      cells.push_back(line.substr(start, pos - start));
    }
    cells.push_back(line.substr(start));
    rows.push_back(std::move(cells));
  }
  return rows;
}

int cmd_report(const ReportArgs& a, std::ostream& out, Logger& log) {
  const std::vector<std::string> header{"dataset", "approach", "AC", "PR", "SE", "F1", "SP", "AUC"};
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
  if (!a.confusion.empty()) {
    if (a.confusion.size() != 4) throw InvalidInput("--confusion takes TP FP FN TN");
    const ConfusionMatrix cm{a.confusion[0], a.confusion[1], a.confusion[2], a.confusion[3]};
    const MetricReport m = compute_metrics(cm);
    std::vector<std::string> row{"-", "confusion"};
    for (const Ratio* r : {&m.ac, &m.pr, &m.se, &m.f1, &m.sp, &m.auc}) {
      row.push_back(r->value ? fixed(100 * *r->value, 2) : "—");
    }
    rows.push_back(row);
    notes = footnotes(m);
  }
  for (const auto& input : a.inputs) {
    const auto csv = read_csv_rows(input);
    if (csv.empty() || csv.front() != header) {
      throw FormatError("not an eval report (unexpected header): " + input);
    }
    for (std::size_t i = 1; i < csv.size(); ++i) {
      if (csv[i].size() != header.size()) throw FormatError("malformed report row in " + input);
      auto row = csv[i];
      for (std::size_t c = 2; c < row.size(); ++c) {
        if (row[c].empty()) row[c] = "—";
      }
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw InvalidInput("report needs --inputs or --confusion");

  // Aligned text table; the dash counts as one column.
  auto width = [](const std::string& s) { return s == "—" ? std::size_t{1} : s.size(); };
  std::vector<std::size_t> widths;
  for (const auto& h : header) widths.push_back(h.size());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::string text;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(widths[c] - width(row[c]), ' ');
      text += c < 2 ? row[c] + pad : pad + row[c];
      text += c + 1 < row.size() ? "  " : "\n";
    }
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  for (const auto& n : notes) text += n + '\n';
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    log.info("wrote ", a.out);
  }
  return kOk;
}

int cmd_synth(SynthArgs a, std::ostream& out, std::uint64_t seed) {
  a.opts.seed = seed;
  const auto samples = synth_images(a.opts);
  write_synth(samples, a.out_dir);
  out << "wrote " << samples.size() << " images to " << a.out_dir << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

// The subcommand named on the command line, skipping global option values.
std::string find_subcommand(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" || a == "--seed" || a == "--threads") {
      ++i;
      continue;
    }
    if (!a.empty() && a[0] != '-') return a;
  }
  return {};
}

std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Appends `--key value` for every config entry the command line leaves unset
// and the selected subcommand (or the top level) understands.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  const std::string path = config_path(args);
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw FormatError("config " + path + ": expected a JSON object");

  CLI::App* sub = nullptr;
  if (const std::string name = find_subcommand(args); !name.empty()) {
    sub = app.get_subcommand_no_throw(name);
  }
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || has_flag(args, flag) || has_flag(args, "--no-" + key)) continue;
    const CLI::Option* opt = sub ? sub->get_option_no_throw(flag) : nullptr;
    if (!opt) opt = app.get_option_no_throw(flag);
    if (!opt) throw FormatError("config " + path + ": unknown key '" + key + "'");
    auto scalar = [&](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
      if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
      if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return std::string(buf);
      }
      throw FormatError("config " + path + ": unsupported value for '" + key + "'");
    };
    if (value.is_boolean()) {
      if (opt->get_expected_max() == 0) {
        merged.push_back(flag + (value.get<bool>() ? "=true" : "=false"));
      } else {
        merged.push_back(flag);
        merged.push_back(value.get<bool>() ? "true" : "false");
      }
    } else if (value.is_array()) {
      merged.push_back(flag);
      for (const auto& v : value) merged.push_back(scalar(v));
    } else {
      merged.push_back(flag);
      merged.push_back(scalar(value));
    }
  }
  return merged;
}

json resolved_config(const CLI::App& sub, const Globals& g) {
  json j;
  j["command"] = sub.get_name();
  j["seed"] = g.seed;
  j["threads"] = thread_count();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->get_expected_max() == 0) {
      j[name] = opt->count() ? opt->as<bool>() : opt->get_default_str() == "true";
      continue;
    }
    std::vector<std::string> values = opt->results();
    if (values.empty() && !opt->get_default_str().empty()) values = {opt->get_default_str()};
    if (opt->get_expected_max() > 1) {
      j[name] = values;
    } else {
      j[name] = values.empty() ? "" : values.front();
    }
  }
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blue-white veil detection pipeline", "bwv"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config, "JSON file of flag defaults (flag names as keys)");
  app.add_option("--seed", g.seed, "Seed for every randomized step");
  app.add_option("--threads", g.threads, "Worker cap (0 = all cores; 1 = bitwise deterministic)");
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  AnnotateArgs an;
  auto* annotate = app.add_subcommand("annotate", "Label images by the veil color range");
  annotate->add_option("--input-dir", an.input_dir, "Directory of PNG/JPEG images")->required();
  annotate->add_option("--out", an.out, "Output JSON-lines file")->required();
  annotate->add_option("--overlay-dir", an.overlay_dir, "Write flagged-patch overlays here");
  annotate->add_option("--labels", an.labels, "Reference stem,label CSV to score agreement");
  annotate->add_option("--r-min", an.range.r_min);
  annotate->add_option("--r-max", an.range.r_max);
  annotate->add_option("--g-min", an.range.g_min);
  annotate->add_option("--g-max", an.range.g_max);
  annotate->add_option("--b-min", an.range.b_min);
  annotate->add_option("--b-max", an.range.b_max);
  annotate->add_option("--patch", an.scan.patch_size, "Patch side in pixels");
  annotate->add_option("--min-pixels", an.scan.min_pixels, "In-range pixels to flag a patch");
  annotate->add_option("--min-patches", an.scan.min_patches, "Flagged patches to call BWV");

  IngestArgs in;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a manifest from images and a labels CSV");
  ingest_cmd->add_option("--input-dir", in.input_dir)->required();
  ingest_cmd->add_option("--labels", in.labels, "CSV with header stem,label")->required();
  ingest_cmd->add_option("--out", in.out, "Output manifest")->required();

  AugmentArgs au;
  auto* augment = app.add_subcommand("augment", "Rotate, flip and zoom every manifest entry");
  augment->add_option("--manifest", au.manifest)->required();
  augment->add_option("--out-dir", au.out_dir, "Directory for augmented PNGs")->required();
  augment->add_option("--out-manifest", au.out_manifest)->required();
  augment->add_option("--zoom-factor", au.zoom);

  SplitArgs sp;
  auto* split_cmd = app.add_subcommand("split", "Assign entries to train/val/test");
  split_cmd->add_option("--manifest", sp.manifest)->required();
  split_cmd->add_option("--out", sp.out, "Output manifest (default: rewrite --manifest)");
  split_cmd->add_option("--train", sp.plan.train);
  split_cmd->add_option("--val", sp.plan.val);
  split_cmd->add_option("--test", sp.plan.test);
  split_cmd->add_flag("--stratified,!--no-stratified", sp.plan.stratified,
                      "Split each class separately (default on)")
      ->default_str("true");
  split_cmd->add_flag("--keep-groups,!--no-keep-groups", sp.keep_groups,
                      "Keep augmented copies with their source (default on)")
      ->default_str("true");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the network with SGDM");
  train_cmd->add_option("--manifest", tr.manifest)->required();
  train_cmd->add_option("--activation", tr.activation, "prelu | leakyrelu | relu");
  train_cmd->add_option("--lr", tr.cfg.learning_rate);
  train_cmd->add_option("--momentum", tr.cfg.momentum);
  train_cmd->add_option("--epochs", tr.cfg.max_epochs);
  train_cmd->add_option("--max-iters", tr.cfg.max_iterations);
  train_cmd->add_option("--batch", tr.cfg.batch_size);
  train_cmd->add_option("--folds", tr.cfg.fold_count,
                        "Cross-validation folds over non-test entries; 1 uses the manifest's "
                        "train/val split");
  train_cmd->add_option("--val-every", tr.cfg.validation_every);
  train_cmd->add_option("--out", tr.out, "Model file (.bwvnet)");
  train_cmd->add_option("--history", tr.history, "Per-iteration CSV of the selected run");
  train_cmd->add_flag("--keep-groups,!--no-keep-groups", tr.keep_groups,
                      "Keep augmented copies in their source's fold (default on)")
      ->default_str("true");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a model on a manifest");
  eval_cmd->add_option("--model", ev.model)->required();
  eval_cmd->add_option("--manifest", ev.manifest)->required();
  eval_cmd->add_option("--out", ev.out, "Report CSV");
  eval_cmd->add_option("--split", ev.split, "all | train | val | test | unassigned");
  eval_cmd->add_option("--predictions", ev.predictions, "Per-entry predictions CSV");
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset column (default: manifest stem)");
  eval_cmd->add_option("--approach", ev.approach, "Approach column (default: activation)");

  ExplainArgs ex;
  auto* explain_cmd = app.add_subcommand("explain", "Attribute a prediction to image regions");
  explain_cmd->add_option("--model", ex.model)->required();
  explain_cmd->add_option("--image", ex.image)->required();
  explain_cmd->add_option("--class", ex.cls, "bwv | nonbwv");
  explain_cmd->add_option("--features", ex.cfg.feature_count);
  explain_cmd->add_option("--samples", ex.cfg.sample_count);
  explain_cmd->add_option("--kernel-width", ex.cfg.surrogate.kernel_width);
  explain_cmd->add_option("--ridge", ex.cfg.surrogate.ridge);
  explain_cmd->add_option("--top-k", ex.top_k);
  explain_cmd->add_option("--out-heatmap", ex.out_heatmap);
  explain_cmd->add_option("--out-mask", ex.out_mask);
  explain_cmd->add_option("--out-json", ex.out_json, "Importance JSON (default: stdout)");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Tabulate eval reports or a confusion matrix");
  report_cmd->add_option("--inputs", rp.inputs, "Eval report CSVs");
  report_cmd->add_option("--confusion", rp.confusion, "TP FP FN TN")->expected(4);
  report_cmd->add_option("--out", rp.out, "Text table (default: stdout)");

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write labeled synthetic images");
  synth_cmd->group("");
  synth_cmd->add_option("--out-dir", sy.out_dir)->required();
  synth_cmd->add_option("--count", sy.opts.count);
  synth_cmd->add_option("--size", sy.opts.size);
  synth_cmd->add_option("--bwv-fraction", sy.opts.bwv_fraction);

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> merged;
    try {
      merged = merge_config(args, app);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  if (g.threads > 0) set_thread_count(g.threads);
  CLI::App* sub = app.get_subcommands().front();
  err << resolved_config(*sub, g).dump() << '\n';
  Logger log(err, g.quiet);

  try {
    if (sub == annotate) return cmd_annotate(an, out, log);
    if (sub == ingest_cmd) return cmd_ingest(in, out, log);
    if (sub == augment) return cmd_augment(au, out, log);
    if (sub == split_cmd) return cmd_split(sp, out, log, g.seed);
    if (sub == train_cmd) return cmd_train(tr, out, log, g.seed);
    if (sub == eval_cmd) return cmd_eval(ev, out, log);
    if (sub == explain_cmd) return cmd_explain(ex, out, log, g.seed);
    if (sub == report_cmd) return cmd_report(rp, out, log);
    if (sub == synth_cmd) return cmd_synth(sy, out, g.seed);
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace bwv::cli
