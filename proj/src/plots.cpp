#include "scgan/plots.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "scgan/checkpoint.hpp"
#include "scgan/config.hpp"
#include "scgan/experiment.hpp"
#include "scgan/svg.hpp"

namespace scgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kMetricNames = {
    "fid", "ifid", "f8", "f_eighth", "is_analogue",
    "cls_accuracy", "correction_accuracy", "confidence_auc"};

double metric_value(const MetricsRow& row, const std::string& name) {
  if (name == "fid") return row.fid;
  if (name == "ifid") return row.ifid;
  if (name == "f8") return row.f8;
  if (name == "f_eighth") return row.f_eighth;
  if (name == "is_analogue") return row.is_analogue;
  if (name == "cls_accuracy") return row.cls_accuracy;
  if (name == "correction_accuracy") return row.correction_accuracy;
  if (name == "confidence_auc") return row.confidence_auc;
  throw ContractError("unknown metric " + name);
}

PlotFrame frame_for(double x0, double x1, double y0, double y1) {
  PlotFrame f;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
  f.x0 = x0 - mx;
  f.x1 = x1 + mx;
  f.y0 = y0 - my;
  f.y1 = y1 + my;
  return f;
}

void draw_axes(SvgCanvas& svg, const PlotFrame& f, const std::string& xlabel,
               const std::string& ylabel) {
  svg.rect(f.px, f.py, f.pw, f.ph, "#333333", "none");
  svg.text(f.px + f.pw / 2, f.py + f.ph + 32, xlabel, 12, "middle");
  svg.text(12, f.py + 12, ylabel, 12, "start");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", f.x0);
  svg.text(f.px, f.py + f.ph + 16, buf, 10, "middle");
  std::snprintf(buf, sizeof(buf), "%.4g", f.x1);
  svg.text(f.px + f.pw, f.py + f.ph + 16, buf, 10, "middle");
  std::snprintf(buf, sizeof(buf), "%.4g", f.y0);
  svg.text(f.px - 4, f.py + f.ph, buf, 10, "end");
  std::snprintf(buf, sizeof(buf), "%.4g", f.y1);
  svg.text(f.px - 4, f.py + 10, buf, 10, "end");
}

void plot_metric_curves(const std::string& out_path, const std::string& xlabel,
                        const std::string& metric,
                        const std::map<std::string, std::vector<std::pair<double, double>>>& series) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (series.empty() || x0 > x1) throw ConfigError("no data to plot for " + metric);

  SvgCanvas svg(620, 480);
  PlotFrame f = frame_for(x0, x1, y0, y1);
  draw_axes(svg, f, xlabel, metric);
  int color = 0;
  double legend_y = f.py + 14;
  for (const auto& [name, pts] : series) {
    const std::string& c = class_palette()[static_cast<size_t>(color++) % class_palette().size()];
    std::vector<std::pair<double, double>> mapped;
    for (const auto& [x, y] : pts) mapped.emplace_back(f.sx(x), f.sy(y));
    svg.polyline(mapped, c, 1.5);
    for (const auto& [x, y] : mapped) svg.circle(x, y, 2.5, c);
    svg.text(f.px + f.pw - 150, legend_y, name, 11);
    svg.line(f.px + f.pw - 170, legend_y - 4, f.px + f.pw - 155, legend_y - 4, c, 2.0);
    legend_y += 14;
  }
  svg.write(out_path);
}

void render_run_plots(const std::string& dir) {
  json config = load_json_file(dir + "/config.json");
  if (!config.contains("eval"))
    throw ConfigError(dir + "/config.json records no eval path; cannot draw scatter plots");
  EvalSet eval = load_eval_set(config.at("eval").get<std::string>());
  Corpus corpus = load_corpus(config.at("corpus").get<std::string>());

  TrainConfig cfg = parse_train_config([&] {
    json t = config;
    t.erase("strategy");
    t.erase("seed");
    t.erase("model");
    t.erase("corpus");
    t.erase("eval");
    return t;
  }());
  cfg.strategy = strategy_from_string(config.at("strategy").get<std::string>());
  cfg.seed = config.at("seed").get<uint64_t>();

  std::vector<MetricsRow> rows;
  {
    std::ifstream in(dir + "/metrics.jsonl");
    if (!in) throw ConfigError(dir + ": missing metrics.jsonl");
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) rows.push_back(metrics_row_from_json(line));
  }

  fs::create_directories(dir + "/plots");

  // One scatter per checkpoint: real reference vs generated, colored by class.
  std::vector<long> steps;
  for (const auto& entry : fs::directory_iterator(dir + "/checkpoints")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step-", 0) == 0) steps.push_back(std::stol(name.substr(5)));
  }
  std::sort(steps.begin(), steps.end());

  const CorpusView view = corpus.view();
  for (long step : steps) {
    TrainState state =
        load_checkpoint(dir + "/checkpoints/step-" + std::to_string(step), view, cfg);
    const ModelSet& m = state.models;

    const int n = 1500;
    Rng rng = Rng::stream(cfg.seed, "plot.draws", static_cast<uint64_t>(step));
    Matrix Y(n, m.cfg.K);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int k = rng.index(m.cfg.K);
      Y.at(i, k) = 1.0;
      labels[static_cast<size_t>(i)] = k;
    }
    Matrix Z(n, m.cfg.d_z);
    for (double& v : Z.data) v = rng.normal();
    Matrix gen = m.generate(Z, Y);

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const Matrix* pts : {&eval.x, &gen}) {
      for (int i = 0; i < pts->rows; ++i) {
        x0 = std::min(x0, pts->at(i, 0));
        x1 = std::max(x1, pts->at(i, 0));
        y0 = std::min(y0, pts->at(i, 1));
        y1 = std::max(y1, pts->at(i, 1));
      }
    }
    SvgCanvas svg(620, 480);
    PlotFrame f = frame_for(x0, x1, y0, y1);
    draw_axes(svg, f, "x0", "x1");
    for (int i = 0; i < eval.x.rows; ++i)
      svg.circle(f.sx(eval.x.at(i, 0)), f.sy(eval.x.at(i, 1)), 1.5, "#bbbbbb", 0.5);
    for (int i = 0; i < gen.rows; ++i) {
      const std::string& c =
          class_palette()[static_cast<size_t>(labels[static_cast<size_t>(i)]) % class_palette().size()];
      svg.circle(f.sx(gen.at(i, 0)), f.sy(gen.at(i, 1)), 1.5, c, 0.8);
    }
    svg.text(f.px + 6, f.py + f.ph - 6, "step " + std::to_string(step), 12);
    svg.write(dir + "/plots/scatter-step-" + std::to_string(step) + ".svg");
  }

  for (const std::string& metric : kMetricNames) {
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    auto& pts = series[config.at("strategy").get<std::string>()];
    for (const MetricsRow& row : rows)
      pts.emplace_back(static_cast<double>(row.step), metric_value(row, metric));
    plot_metric_curves(dir + "/plots/metric-" + metric + ".svg", "g_steps", metric, series);
  }
}

void render_sweep_plots(const std::string& dir) {
  json sweep = load_json_file(dir + "/sweep.json");
  const std::string axis = sweep.at("axis").get<std::string>();

  std::ifstream in(dir + "/summary.csv");
  if (!in) throw ConfigError(dir + ": missing summary.csv");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(dir + "/summary.csv: empty file");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ParseError(dir + "/summary.csv: missing column " + name);
  };
  const int c_strategy = column("strategy");
  const int c_axis = column("axis_value");

  // strategy -> axis value -> metric values over seeds
  std::map<std::string, std::map<double, std::map<std::string, std::vector<double>>>> table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const double axis_value = std::stod(cells[static_cast<size_t>(c_axis)]);
    for (const std::string& metric : kMetricNames) {
      table[cells[static_cast<size_t>(c_strategy)]][axis_value][metric].push_back(
          std::stod(cells[static_cast<size_t>(column(metric))]));
    }
  }

  fs::create_directories(dir + "/plots");
  for (const std::string& metric : kMetricNames) {
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (const auto& [strategy, by_axis] : table) {
      for (const auto& [axis_value, metrics] : by_axis) {
        const auto& vals = metrics.at(metric);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        series[strategy].emplace_back(axis_value, mean);
      }
    }
    plot_metric_curves(dir + "/plots/metric-" + metric + "-vs-" + axis + ".svg", axis, metric,
                       series);
  }
}

}  // namespace

void render_plots(const std::string& dir) {
  if (fs::exists(dir + "/metrics.jsonl")) {
    render_run_plots(dir);
  } else if (fs::exists(dir + "/sweep.json") && fs::exists(dir + "/summary.csv")) {
    render_sweep_plots(dir);
  } else {
    throw ConfigError(dir + ": missing metrics file (neither a run nor a sweep directory)");
  }
}

}  // namespace scgan
