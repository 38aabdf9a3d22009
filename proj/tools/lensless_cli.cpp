// lensless: command-line driver for dataset generation, training, mask
// evaluation and the benchmark grid.
//
// Output locations default to subdirectories of $LENSLESS_OUT (or
// ./lensless-out when unset).

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lensless/datasets.hpp"
#include "lensless/io.hpp"
#include "lensless/kernels.hpp"
#include "lensless/metrics.hpp"
#include "lensless/report.hpp"
#include "lensless/trainer.hpp"

namespace fs = std::filesystem;
using namespace lensless;
using nlohmann::json;

namespace {

fs::path output_root() {
  const char* env = std::getenv("LENSLESS_OUT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("lensless-out");
}

fs::path resolve_out(const std::string& flag, const fs::path& fallback) {
  return flag.empty() ? output_root() / fallback : fs::path(flag);
}

// Either an on-disk dataset (--data) or the synthetic generator.
struct DataOptions {
  std::string dir;
  std::size_t classes = 10;
  std::size_t per_class = 100;
  std::size_t size = 24;
  std::uint64_t seed = 7;
  double clutter = SyntheticSpec{}.clutter;

  // gen-data has no --data and calls the generator seed plain --seed.
  void add_to(CLI::App& app, bool generator_only = false) {
    if (!generator_only) {
      app.add_option("--data", dir, "Dataset root (<class>/<image>.pgm); synthetic when omitted");
    }
    app.add_option("--classes", classes, "Synthetic classes")->capture_default_str();
    app.add_option("--per-class", per_class, "Synthetic images per class")->capture_default_str();
    app.add_option("--size", size, "Image side n in pixels")->capture_default_str();
    app.add_option(generator_only ? "--seed" : "--data-seed", seed, "Synthetic generator seed")
        ->capture_default_str();
    app.add_option("--clutter", clutter, "Synthetic background clutter amplitude")
        ->capture_default_str();
  }

  Dataset load() const {
    if (!dir.empty()) return load_dataset(dir, size);
    if (classes < 2) {
      throw ConfigError("--classes must be at least 2: a recognizer needs two or more identities");
    }
    SyntheticSpec spec;
    spec.num_classes = classes;
    spec.per_class = per_class;
    spec.n = size;
    spec.seed = seed;
    spec.clutter = clutter;
    return gen_synthetic(spec);
  }
};

// Training flags. Only flags given on the command line override the config
// file, which in turn overrides the profile.
struct TrainFlags {
  std::string profile = "desk";
  std::string config_file;
  std::string pattern, hi, forward_mode;
  double alpha = 0, lr = 0, mask_lr_scale = 0, random_ratio = 0;
  std::uint64_t seed = 0;
  std::size_t epochs = 0, batch = 0, mask_size = 0, hidden = 0;
  bool no_augment = false, raw_mask = false;
  CLI::App* app = nullptr;

  void add_to(CLI::App& a, bool with_cell_flags = true) {
    app = &a;
    a.add_option("--profile", profile, "Built-in profile")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    a.add_option("--config", config_file, "JSON training config")->check(CLI::ExistingFile);
    if (with_cell_flags) {
      a.add_option("--pattern", pattern, "Mask pattern")
          ->check(CLI::IsMember({"pinhole", "full-open", "random", "learned"}));
      a.add_option("--hi", hi, "Human-imperceptible loss")
          ->check(CLI::IsMember({"none", "sim", "tv", "inv", "rip"}));
      a.add_option("--alpha", alpha, "Weight of the hi loss");
      a.add_option("--seed", seed, "Training seed");
    }
    a.add_option("--epochs", epochs, "Epochs");
    a.add_option("--batch-size", batch, "Mini-batch size");
    a.add_option("--lr", lr, "Initial learning rate");
    a.add_option("--mask-lr-scale", mask_lr_scale, "Mask logit learning-rate multiplier");
    a.add_option("--mask-size", mask_size, "Mask side m");
    a.add_option("--hidden", hidden, "Hidden units of the recognizer");
    a.add_option("--random-ratio", random_ratio, "Open fraction of the random pattern");
    a.add_option("--forward-mode", forward_mode, "Mask used in the training capture")
        ->check(CLI::IsMember({"relaxed", "hard"}));
    a.add_flag("--no-augment", no_augment, "Disable crop/flip augmentation");
    a.add_flag("--raw-mask", raw_mask, "Capture with the unnormalized mask");
  }

  bool given(const char* name) const { return app->count(name) > 0; }

  TrainConfig resolve() const {
    TrainConfig cfg = profile == "paper" ? TrainConfig::paper() : TrainConfig::desk();
    if (!config_file.empty()) cfg = train_config_from_json(io::read_json(config_file), cfg);
    if (given("--pattern")) cfg.pattern = parse_mask_kind(pattern);
    if (given("--hi")) cfg.hi_kind = parse_hi_kind(hi);
    if (given("--alpha")) cfg.alpha = alpha;
    if (given("--seed")) cfg.seed = seed;
    if (given("--epochs")) cfg.epochs = epochs;
    if (given("--batch-size")) cfg.batch_size = batch;
    if (given("--lr")) cfg.lr_initial = lr;
    if (given("--mask-lr-scale")) cfg.mask_lr_scale = mask_lr_scale;
    if (given("--mask-size")) cfg.mask_size = mask_size;
    if (given("--hidden")) cfg.hidden_units = hidden;
    if (given("--random-ratio")) cfg.random_ratio = random_ratio;
    if (given("--forward-mode")) {
      cfg.forward_mode = forward_mode == "hard" ? ForwardMode::Hard : ForwardMode::Relaxed;
    }
    if (no_augment) cfg.augment = false;
    if (raw_mask) cfg.normalize_mask = false;
    cfg.validate();
    return cfg;
  }
};

void print_epoch(const EpochRecord& r) {
  std::printf("epoch %4zu  lr %.4g  rec %.4f  hi %.4f  total %.4f  train %.3f  test %.3f  open %.3f\n",
              r.epoch, r.lr, r.rec_loss, r.hi_loss, r.total, r.train_top1, r.test_top1,
              r.aperture_ratio);
  std::fflush(stdout);
}

std::string ascii_mask(const CodedMask& mask) {
  std::string out;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    for (std::size_t c = 0; c < mask.size(); ++c) out += mask.open(r, c) ? "# " : ". ";
    out.back() = '\n';
  }
  return out;
}

// A mask from a PBM file, a checkpoint, a run directory, or a built-in pattern.
struct MaskSource {
  std::string mask_file, checkpoint, pattern;
  std::size_t mask_size = 8;
  double random_ratio = 0.5;
  std::uint64_t seed = 1;

  void add_to(CLI::App& app) {
    app.add_option("--mask", mask_file, "Mask PBM file")->check(CLI::ExistingFile);
    app.add_option("--checkpoint", checkpoint, "checkpoint_best.bin or a run directory")
        ->check(CLI::ExistingPath);
    app.add_option("--pattern", pattern, "Built-in pattern")
        ->check(CLI::IsMember({"pinhole", "full-open", "random"}));
    app.add_option("--mask-size", mask_size, "Side of a built-in pattern")->capture_default_str();
    app.add_option("--random-ratio", random_ratio, "Open fraction of the random pattern")
        ->capture_default_str();
    app.add_option("--seed", seed, "Seed of the random pattern")->capture_default_str();
  }

  int given() const {
    return static_cast<int>(!mask_file.empty()) + static_cast<int>(!checkpoint.empty()) +
           static_cast<int>(!pattern.empty());
  }

  fs::path checkpoint_path() const {
    const fs::path p(checkpoint);
    return fs::is_directory(p) ? p / "checkpoint_best.bin" : p;
  }

  std::optional<report::Checkpoint> load_checkpoint() const {
    if (checkpoint.empty()) return std::nullopt;
    return report::read_checkpoint(checkpoint_path());
  }

  CodedMask load(const std::optional<report::Checkpoint>& ck) const {
    if (given() != 1) throw ConfigError("give exactly one of --mask, --checkpoint, --pattern");
    if (ck) return binarize(ck->logits);
    if (!mask_file.empty()) return io::read_pbm(mask_file);
    TrainConfig cfg;
    cfg.pattern = parse_mask_kind(pattern);
    cfg.mask_size = mask_size;
    cfg.random_ratio = random_ratio;
    cfg.seed = seed;
    return fixed_mask(cfg);
  }
};

int cmd_gen_data(const DataOptions& data, const std::string& out_flag) {
  const fs::path out = resolve_out(out_flag, "data");
  const Dataset ds = data.load();
  save_dataset(ds, out);
  const fs::path manifest = out / "manifest.json";
  json j = io::read_json(manifest);
  j["generator"] = {{"kind", "synthetic"},
                    {"classes", data.classes},
                    {"per_class", data.per_class},
                    {"size", data.size},
                    {"seed", data.seed},
                    {"clutter", data.clutter}};
  io::write_json(manifest, j);
  std::printf("%zu images in %zu classes\n%s\n", ds.size(), ds.num_classes,
              manifest.string().c_str());
  return 0;
}

int cmd_train(const DataOptions& data, const TrainFlags& flags, const std::string& out_flag,
              bool quiet) {
  const TrainConfig cfg = flags.resolve();
  const Dataset ds = data.load();
  const std::string method = report::method_name(cfg.pattern, cfg.hi_kind);
  const fs::path out = resolve_out(
      out_flag, fs::path("runs") / (std::string(to_string(cfg.pattern)) + "-" +
                                    std::string(to_string(cfg.hi_kind)) + "-s" +
                                    std::to_string(cfg.seed)));
  if (!quiet) {
    std::printf("%s on %zu images (%zux%zu), %zu epochs, kernels %s\n", method.c_str(), ds.size(),
                ds.image_size(), ds.image_size(), cfg.epochs,
                std::string(kernels::backend_name(kernels::active_backend())).c_str());
  }
  const report::RunResult r =
      report::run_training(ds, cfg, out, quiet ? EpochObserver{} : EpochObserver{print_epoch});
  std::printf("run      %s\n", out.string().c_str());
  std::printf("best     epoch %zu  top1 %s\n", r.model.best_epoch,
              io::format_double(r.model.best_top1).c_str());
  std::printf("auc_rip  %s\nblur     %s\naperture %s\n", io::format_double(r.metrics.rip.auc).c_str(),
              io::format_double(r.metrics.blur.mean).c_str(),
              io::format_double(r.metrics.aperture_ratio).c_str());
  std::printf("%s", ascii_mask(r.model.mask).c_str());
  return 0;
}

int cmd_eval(const DataOptions& data, const MaskSource& src, const std::string& split_flag,
             bool raw, const std::string& out_flag) {
  const auto ck = src.load_checkpoint();
  const CodedMask mask = src.load(ck);
  Dataset ds = data.load();
  CaptureConfig capture{!raw, 0.0};
  double epsilon = kDefaultEpsilon;
  TrainConfig train_cfg;
  if (ck) {
    train_cfg = train_config_from_json(ck->config, TrainConfig::desk());
    capture = train_cfg.capture_config();
    if (raw) capture.normalize_mask = false;
    epsilon = train_cfg.epsilon;
  }
  const std::string which = split_flag.empty() ? (ck ? "test" : "all") : split_flag;
  if (which == "test") {
    ds = split(ds, SplitSpec{train_cfg.train_fraction, train_cfg.seed}).second;
  }
  if (ck && ck->params.input_size != ds.image_size() * ds.image_size()) {
    throw DimensionError("checkpoint expects " + std::to_string(ck->params.input_size) +
                         " input pixels but the dataset images have " +
                         std::to_string(ds.image_size() * ds.image_size()));
  }
  const report::MaskMetrics m =
      report::evaluate_mask(mask, ds, capture, ck ? &ck->params : nullptr, epsilon);
  const fs::path out = resolve_out(out_flag, fs::path("eval") / m.mask_id);
  fs::create_directories(out);
  report::write_metrics(out, m, "mask " + m.mask_id);
  json meta = io::read_json(out / "metrics.json");
  meta["split"] = which;
  io::write_json(out / "metrics.json", meta);
  if (!capture.normalize_mask) std::printf("note: RIP evaluated with the raw (unnormalized) mask\n");
  std::printf("mask     %s (%zux%zu)\n", m.mask_id.c_str(), mask.size(), mask.size());
  std::printf("images   %zu (%s)\n", ds.size(), which.c_str());
  if (m.top1) std::printf("top1     %s\n", io::format_double(*m.top1).c_str());
  std::printf("auc_rip  %s\nblur     %s\naperture %s\narea     %s\n%s\n",
              io::format_double(m.rip.auc).c_str(), io::format_double(m.blur.mean).c_str(),
              io::format_double(m.aperture_ratio).c_str(), io::format_double(m.area_ratio).c_str(),
              (out / "metrics.json").string().c_str());
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "' in --seeds");
    }
  }
  if (seeds.empty()) throw ConfigError("--seeds is empty");
  return seeds;
}

int cmd_grid(const DataOptions& data, const TrainFlags& flags, const std::string& seeds_text,
             double alpha, std::size_t workers, const std::string& out_flag, bool quiet) {
  TrainConfig base = flags.resolve();
  const Dataset ds = data.load();
  const fs::path out = resolve_out(out_flag, "grid");
  const auto cells = report::default_grid(parse_seeds(seeds_text), alpha);
  const auto rows = report::run_grid(ds, cells, base, out, {workers, quiet});

  std::printf("%-10s %5s %12s %12s %10s\n", "method", "runs", "median top1", "median auc", "blur");
  for (const auto& s : report::summarize(rows)) {
    std::printf("%-10s %5zu %12.4f %12.4f %10.4f\n", s.method.c_str(), s.runs, s.median_top1,
                s.median_auc_rip, s.median_blur);
  }
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.ok) {
      ++failed;
      std::fprintf(stderr, "cell %s failed: %s\n", r.cell.id().c_str(), r.error.c_str());
    }
  }
  std::printf("%s\n", (out / "summary.csv").string().c_str());
  return failed == 0 ? 0 : 1;
}

int cmd_export_mask(const MaskSource& src, const std::string& out_flag, bool relaxed) {
  const auto ck = src.load_checkpoint();
  const CodedMask mask = src.load(ck);
  if (relaxed) {
    if (!ck) throw ConfigError("--relaxed needs --checkpoint");
    const fs::path out = resolve_out(out_flag, "mask_relaxed.f64");
    io::write_f64(out, relax(ck->logits));
    std::printf("%s\n", out.string().c_str());
    return 0;
  }
  const fs::path out = resolve_out(out_flag, "mask.pbm");
  io::write_pbm(out, mask);
  std::printf("%s\n%s.json\n", out.string().c_str(), out.string().c_str());
  return 0;
}

int cmd_inspect(const MaskSource& src) {
  const auto ck = src.load_checkpoint();
  const CodedMask mask = src.load(ck);
  std::printf("%s", ascii_mask(mask).c_str());
  std::printf("size     %zux%zu\nopen     %zu\naperture %s\nid       %s\n", mask.size(),
              mask.size(), mask.open_count(), io::format_double(aperture_ratio(mask)).c_str(),
              mask.id().c_str());
  if (ck) {
    std::printf("model    %s\nbest     epoch %zu  top1 %s\n", ck->params.describe().c_str(),
                ck->best_epoch, io::format_double(ck->best_top1).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded-mask lensless imaging: privacy-aware mask learning and evaluation",
               "lensless"};
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Kernel backend (scalar, avx2, neon); default: best available");

  DataOptions gen_data;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate the synthetic glyph dataset");
  gen_data.add_to(*gen, true);
  gen->add_option("--out", gen_out, "Output directory");

  DataOptions train_data;
  TrainFlags train_flags;
  std::string train_out;
  bool train_quiet = false;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one mask/recognizer configuration");
  train_data.add_to(*train_cmd);
  train_flags.add_to(*train_cmd);
  train_cmd->add_option("--out", train_out, "Run directory");
  train_cmd->add_flag("--quiet", train_quiet, "Only print the final summary");

  DataOptions eval_data;
  MaskSource eval_src;
  std::string eval_out, eval_split;
  bool eval_raw = false;
  CLI::App* eval = app.add_subcommand("eval", "Score a mask: RIP curve, blurriness, top-1");
  eval_data.add_to(*eval);
  eval_src.add_to(*eval);
  eval->add_option("--split", eval_split,
                   "Images to score: test split of the checkpoint config, or all")
      ->check(CLI::IsMember({"test", "all"}));
  eval->add_flag("--raw-mask", eval_raw, "Use the unnormalized mask");
  eval->add_option("--out", eval_out, "Output directory");

  DataOptions grid_data;
  TrainFlags grid_flags;
  std::string grid_out, grid_seeds = "1,2,3";
  double grid_alpha = 1.0;
  std::size_t grid_workers = 1;
  bool grid_quiet = false;
  CLI::App* grid = app.add_subcommand("grid", "Run the benchmark grid across seeds");
  grid_data.add_to(*grid);
  grid_flags.add_to(*grid, false);
  grid->add_option("--seeds", grid_seeds, "Comma-separated seeds")->capture_default_str();
  grid->add_option("--alpha", grid_alpha, "Weight of the hi loss")->capture_default_str();
  grid->add_option("--workers", grid_workers, "Parallel runs")->capture_default_str();
  grid->add_option("--out", grid_out, "Output directory");
  grid->add_flag("--quiet", grid_quiet, "No per-cell progress");

  MaskSource export_src;
  std::string export_out;
  bool export_relaxed = false;
  CLI::App* exp = app.add_subcommand("export-mask", "Write a mask as PBM (or relaxed float64)");
  export_src.add_to(*exp);
  exp->add_option("--out", export_out, "Output file");
  exp->add_flag("--relaxed", export_relaxed, "Write sigmoid(logits) from a checkpoint");

  MaskSource inspect_src;
  CLI::App* inspect = app.add_subcommand("inspect", "Print a mask as ASCII art");
  inspect_src.add_to(*inspect);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd.empty()) kernels::set_backend(kernels::parse_backend(simd));
    if (*gen) return cmd_gen_data(gen_data, gen_out);
    if (*train_cmd) return cmd_train(train_data, train_flags, train_out, train_quiet);
    if (*eval) return cmd_eval(eval_data, eval_src, eval_split, eval_raw, eval_out);
    if (*grid) {
      return cmd_grid(grid_data, grid_flags, grid_seeds, grid_alpha, grid_workers, grid_out,
                      grid_quiet);
    }
    if (*exp) return cmd_export_mask(export_src, export_out, export_relaxed);
    if (*inspect) return cmd_inspect(inspect_src);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
