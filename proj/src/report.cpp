#include "lensless/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lensless/io.hpp"

#ifndef LENSLESS_BUILD_ID
#define LENSLESS_BUILD_ID "unknown"
#endif

namespace lensless::report {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) { return io::format_double(v); }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in " + path.string());
  }
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view activation_name(Activation a) { return a == Activation::ReLU ? "relu" : "none"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "none") return Activation::None;
  throw IoError("unknown activation '" + s + "' in checkpoint");
}

}  // namespace

std::string build_id() { return LENSLESS_BUILD_ID; }

std::string method_name(MaskKind pattern, HiKind hi) {
  switch (pattern) {
    case MaskKind::Pinhole: return "pinhole";
    case MaskKind::FullOpen: return "full-open";
    case MaskKind::Random: return "random";
    case MaskKind::Learned: break;
  }
  switch (hi) {
    case HiKind::None: return "LwoC";
    case HiKind::Sim: return "LwC-Sim";
    case HiKind::TV: return "LwC-TV";
    case HiKind::Inv: return "LwC-Inv";
    case HiKind::RIP: return "LwC-RIP";
  }
  return "unknown";
}

MaskMetrics evaluate_mask(const CodedMask& mask, const Dataset& ds, const CaptureConfig& cfg,
                          const RecognizerParams* params, double epsilon) {
  if (ds.samples.empty()) throw DimensionError("cannot evaluate a mask on an empty set");
  const std::vector<Image> images = ds.images();
  MaskMetrics m;
  m.rip = rip_curve(mask, images, uniform_delta_grid(), cfg, epsilon);
  m.blur = blur_report(mask, images, cfg);
  m.aperture_ratio = aperture_ratio(mask);
  const double n = static_cast<double>(ds.image_size());
  m.area_ratio = static_cast<double>(mask.size() * mask.size()) / (n * n);
  m.mask_id = mask.id();
  if (params != nullptr) m.top1 = evaluate_top1(*params, mask.to_real(), ds, cfg);
  return m;
}

json metrics_json(const MaskMetrics& m) {
  json j;
  j["top1"] = m.top1 ? json(*m.top1) : json(nullptr);
  j["auc_rip"] = m.rip.auc;
  j["mean_blur"] = m.blur.mean;
  j["aperture_ratio"] = m.aperture_ratio;
  j["area_ratio"] = m.area_ratio;
  j["mask_id"] = m.mask_id;
  j["rip_normalized"] = m.rip.normalized;
  j["images"] = m.blur.scores.size();
  return j;
}

void write_metrics(const fs::path& dir, const MaskMetrics& m, const std::string& svg_title) {
  io::write_json(dir / "metrics.json", metrics_json(m));
  write_rip_csv(dir / "rip_curve.csv", m.rip);
  write_blur_csv(dir / "blur.csv", m.blur);
  io::write_text(dir / "rip_curve.svg",
                 svg_plot(svg_title + " (AUC-RIP " + fmt(m.rip.auc) + ")", "delta",
                          "fraction satisfying RIP",
                          {Series{"RIP curve", m.rip.delta_grid, m.rip.satisfaction}}));
}

void write_rip_csv(const fs::path& path, const RipCurve& curve) {
  std::string text = "delta,satisfaction\n";
  for (std::size_t i = 0; i < curve.delta_grid.size(); ++i) {
    text += fmt(curve.delta_grid[i]) + "," + fmt(curve.satisfaction[i]) + "\n";
  }
  io::write_text(path, text);
}

RipCurve read_rip_csv(const fs::path& path) {
  std::stringstream in(io::read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != "delta,satisfaction") {
    throw IoError("missing RIP curve header in " + path.string());
  }
  RipCurve curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw IoError("bad RIP curve row in " + path.string());
    curve.delta_grid.push_back(parse_double(f[0], path));
    curve.satisfaction.push_back(parse_double(f[1], path));
  }
  auc_rip(curve);
  return curve;
}

void write_blur_csv(const fs::path& path, const BlurReport& blur) {
  std::string text = "image_id,score\n";
  for (std::size_t i = 0; i < blur.scores.size(); ++i) {
    text += std::to_string(i) + "," + fmt(blur.scores[i]) + "\n";
  }
  io::write_text(path, text);
}

void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history,
                       const TrainConfig& cfg) {
  std::string text =
      "epoch,rec_loss,hi_loss,total,alpha,hi_kind,hi_loss_sum,lr,train_top1,test_top1,"
      "aperture_ratio\n";
  const std::string hi(to_string(cfg.hi_kind));
  for (const EpochRecord& r : history) {
    text += std::to_string(r.epoch) + "," + fmt(r.rec_loss) + "," + fmt(r.hi_loss) + "," +
            fmt(r.total) + "," + fmt(cfg.alpha) + "," + hi + "," + fmt(r.hi_loss_sum) + "," +
            fmt(r.lr) + "," + fmt(r.train_top1) + "," + fmt(r.test_top1) + "," +
            fmt(r.aperture_ratio) + "\n";
  }
  io::write_text(path, text);
}

std::string svg_plot(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series, bool lines) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  // Probability-like data keeps the unit range so plots compare across runs.
  if (x0 >= 0 && x1 <= 1) x0 = 0, x1 = 1;
  if (y0 >= 0 && y1 <= 1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream out;
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                kLeft, kTop, pw, ph);
  out << buf;
  for (int t = 0; t <= 4; ++t) {
    const double fx = x0 + (x1 - x0) * t / 4.0, fy = y0 + (y1 - y0) * t / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(fx),
                  kTop + ph + 18, fx);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n",
                  kLeft - 6, py(fy) + 4, fy);
    out << buf;
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    const std::size_t count = std::min(s.x.size(), s.y.size());
    if (lines && count > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < count; ++k) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[k]), py(s.y[k]));
        out << buf;
      }
      out << "\"/>\n";
    } else {
      for (std::size_t k = 0; k < count; ++k) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n",
                      px(s.x[k]), py(s.y[k]), color);
        out << buf;
      }
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"12\" height=\"12\" fill=\"%s\"/>\n",
                  kLeft + pw + 12, ly - 10, color);
    out << buf;
    out << "<text x=\"" << kLeft + pw + 30 << "\" y=\"" << ly << "\">" << xml_escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_checkpoint(const fs::path& path, const TrainedModel& model) {
  json layers = json::array();
  std::vector<double> values(model.logits.values().span().begin(),
                             model.logits.values().span().end());
  for (const DenseLayer& l : model.params.layers) {
    layers.push_back({{"inputs", l.inputs()},
                      {"outputs", l.outputs()},
                      {"activation", activation_name(l.activation)}});
    values.insert(values.end(), l.weights.span().begin(), l.weights.span().end());
    values.insert(values.end(), l.bias.begin(), l.bias.end());
  }
  const json header{{"format", "lensless-checkpoint"},
                    {"version", 1},
                    {"mask_size", model.logits.size()},
                    {"input_size", model.params.input_size},
                    {"layers", layers},
                    {"best_epoch", model.best_epoch},
                    {"best_top1", model.best_top1},
                    {"config", to_json(model.config)}};
  io::write_tensor_file(path, header, values);
}

Checkpoint read_checkpoint(const fs::path& path) {
  json header;
  const std::vector<double> values = io::read_tensor_file(path, header);
  if (header.value("format", "") != "lensless-checkpoint" || header.value("version", 0) != 1) {
    throw IoError(path.string() + " is not a version 1 lensless checkpoint");
  }
  Checkpoint ck;
  std::size_t pos = 0;
  auto take = [&](std::size_t count) {
    if (pos + count > values.size()) throw IoError("checkpoint " + path.string() + " is truncated");
    const double* p = values.data() + pos;
    pos += count;
    return p;
  };
  try {
    const auto m = header.at("mask_size").get<std::size_t>();
    RealGrid logits = RealGrid::square(m);
    std::copy_n(take(m * m), m * m, logits.data());
    ck.logits = MaskLogits(std::move(logits));
    ck.params.input_size = header.at("input_size").get<std::size_t>();
    for (const json& l : header.at("layers")) {
      DenseLayer layer;
      const auto in = l.at("inputs").get<std::size_t>();
      const auto out = l.at("outputs").get<std::size_t>();
      layer.activation = parse_activation(l.at("activation").get<std::string>());
      layer.weights = RealGrid(out, in);
      std::copy_n(take(out * in), out * in, layer.weights.data());
      const double* b = take(out);
      layer.bias.assign(b, b + out);
      ck.params.layers.push_back(std::move(layer));
    }
    ck.best_epoch = header.at("best_epoch").get<std::size_t>();
    ck.best_top1 = header.at("best_top1").get<double>();
    ck.config = header.at("config");
  } catch (const json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  if (pos != values.size()) throw IoError("checkpoint " + path.string() + " has trailing values");
  ck.params.validate();
  return ck;
}

RunResult run_training(const Dataset& dataset, const TrainConfig& cfg, const fs::path& dir,
                       const EpochObserver& observer) {
  cfg.validate();
  dataset.validate();
  const auto t0 = Clock::now();
  fs::create_directories(dir);

  json manifest{{"status", "running"},
                {"build", build_id()},
                {"seed", cfg.seed},
                {"method", method_name(cfg.pattern, cfg.hi_kind)},
                {"config", to_json(cfg)},
                {"dataset",
                 {{"samples", dataset.size()},
                  {"classes", dataset.num_classes},
                  {"image_size", dataset.image_size()}}},
                {"outputs",
                 {{"config", "config.json"},
                  {"history", "history.csv"},
                  {"mask_final", "mask_final.pbm"},
                  {"mask_relaxed", "mask_relaxed.f64"},
                  {"checkpoint", "checkpoint_best.bin"},
                  {"metrics", "metrics.json"},
                  {"rip_curve", "rip_curve.csv"},
                  {"blur", "blur.csv"}}},
                {"started_at", utc_timestamp()}};
  io::write_json(dir / "manifest.json", manifest);
  io::write_json(dir / "config.json", to_json(cfg));

  try {
    const auto [train_set, test_set] = split(dataset, SplitSpec{cfg.train_fraction, cfg.seed});
    std::vector<EpochRecord> seen;
    const auto t_train = Clock::now();
    RunResult result{train(train_set, test_set, cfg,
                           [&](const EpochRecord& r) {
                             seen.push_back(r);
                             write_history_csv(dir / "history.csv", seen, cfg);
                             if (observer) observer(r);
                           }),
                     {},
                     dir};
    const double train_seconds = seconds_since(t_train);
    const TrainedModel& model = result.model;

    io::write_pbm(dir / "mask_final.pbm", model.mask);
    io::write_f64(dir / "mask_relaxed.f64", relax(model.logits));
    write_checkpoint(dir / "checkpoint_best.bin", model);
    result.metrics =
        evaluate_mask(model.mask, test_set, cfg.capture_config(), &model.params, cfg.epsilon);
    write_metrics(dir, result.metrics, method_name(cfg.pattern, cfg.hi_kind));

    std::vector<double> epochs, test_top1, train_top1;
    for (const EpochRecord& r : model.history) {
      epochs.push_back(static_cast<double>(r.epoch));
      train_top1.push_back(r.train_top1);
      test_top1.push_back(r.test_top1);
    }
    io::write_text(dir / "history.svg",
                   svg_plot(method_name(cfg.pattern, cfg.hi_kind) + " accuracy", "epoch", "top-1",
                            {Series{"train", epochs, train_top1}, Series{"test", epochs, test_top1}}));

    manifest["status"] = "complete";
    manifest["best_epoch"] = model.best_epoch;
    manifest["timings"] = {{"train_seconds", train_seconds}, {"total_seconds", seconds_since(t0)}};
    manifest["finished_at"] = utc_timestamp();
    io::write_json(dir / "manifest.json", manifest);
    return result;
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["timings"] = {{"total_seconds", seconds_since(t0)}};
    manifest["finished_at"] = utc_timestamp();
    io::write_json(dir / "manifest.json", manifest);
    throw;
  }
}

std::string GridCell::id() const {
  return std::string(to_string(pattern)) + "-" + std::string(to_string(hi)) + "-a" + fmt(alpha) +
         "-s" + std::to_string(seed);
}

std::vector<GridCell> default_grid(const std::vector<std::uint64_t>& seeds, double alpha) {
  const std::pair<MaskKind, HiKind> configs[] = {
      {MaskKind::Pinhole, HiKind::None}, {MaskKind::FullOpen, HiKind::None},
      {MaskKind::Random, HiKind::None},  {MaskKind::Learned, HiKind::None},
      {MaskKind::Learned, HiKind::Sim},  {MaskKind::Learned, HiKind::TV},
      {MaskKind::Learned, HiKind::Inv},  {MaskKind::Learned, HiKind::RIP}};
  std::vector<GridCell> cells;
  for (const auto& [pattern, hi] : configs) {
    for (std::uint64_t seed : seeds) cells.push_back({pattern, hi, alpha, seed});
  }
  return cells;
}

std::vector<GridRow> run_grid(const Dataset& dataset, const std::vector<GridCell>& cells,
                              const TrainConfig& base, const fs::path& out_dir,
                              const GridOptions& opt) {
  std::set<std::string> ids;
  for (const GridCell& c : cells) {
    if (!ids.insert(c.id()).second) throw ConfigError("duplicate grid cell " + c.id());
  }
  fs::create_directories(out_dir);

  std::vector<GridRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const GridCell& cell = cells[i];
      GridRow& row = rows[i];
      row.cell = cell;
      const auto t0 = Clock::now();
      try {
        TrainConfig cfg = base;
        cfg.pattern = cell.pattern;
        cfg.hi_kind = cell.hi;
        cfg.alpha = cell.alpha;
        cfg.seed = cell.seed;
        const RunResult r = run_training(dataset, cfg, out_dir / cell.id());
        row.ok = true;
        row.top1 = r.metrics.top1.value_or(0.0);
        row.auc_rip = r.metrics.rip.auc;
        row.mean_blur = r.metrics.blur.mean;
        row.aperture_ratio = r.metrics.aperture_ratio;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.seconds = seconds_since(t0);
      if (!opt.quiet) {
        std::lock_guard lock(log_mutex);
        std::cerr << "[" << cell.id() << "] "
                  << (row.ok ? "top1 " + fmt(row.top1) + " auc_rip " + fmt(row.auc_rip)
                             : "FAILED: " + row.error)
                  << "\n";
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  io::write_text(out_dir / "summary.csv", summary_csv(rows));
  std::vector<Series> points;
  for (const MethodSummary& s : summarize(rows)) {
    points.push_back({s.method, {s.median_auc_rip}, {s.median_top1}});
  }
  io::write_text(out_dir / "summary.svg",
                 svg_plot("Accuracy vs AUC-RIP (medians over seeds)", "AUC-RIP", "top-1", points,
                          false));
  return rows;
}

std::string summary_csv(const std::vector<GridRow>& rows) {
  std::string text = "pattern,hi,alpha,seed,top1,auc_rip,mean_blur,aperture_ratio,status\n";
  for (const GridRow& r : rows) {
    text += std::string(to_string(r.cell.pattern)) + "," + std::string(to_string(r.cell.hi)) + "," +
            fmt(r.cell.alpha) + "," + std::to_string(r.cell.seed) + ",";
    if (r.ok) {
      text += fmt(r.top1) + "," + fmt(r.auc_rip) + "," + fmt(r.mean_blur) + "," +
              fmt(r.aperture_ratio) + ",ok\n";
    } else {
      text += ",,,,failed\n";
    }
  }
  return text;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DimensionError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 == 1 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

std::vector<MethodSummary> summarize(const std::vector<GridRow>& rows) {
  std::vector<std::string> order;
  for (const GridRow& r : rows) {
    if (r.ok && std::find(order.begin(), order.end(), r.cell.method()) == order.end()) {
      order.push_back(r.cell.method());
    }
  }
  std::vector<MethodSummary> out;
  for (const std::string& name : order) {
    std::vector<double> top1, auc, blur;
    for (const GridRow& r : rows) {
      if (!r.ok || r.cell.method() != name) continue;
      top1.push_back(r.top1);
      auc.push_back(r.auc_rip);
      blur.push_back(r.mean_blur);
    }
    out.push_back({name, top1.size(), median(top1), median(auc), median(blur)});
  }
  return out;
}

}  // namespace lensless::report
