#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scgan/corpus.hpp"

namespace scgan {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_array(const double* x, int n) {
  std::string s = "[";
  for (int j = 0; j < n; ++j) {
    if (j) s += ",";
    s += fmt_double(x[j]);
  }
  s += "]";
  return s;
}

// Wraps an input stream and reports the line number with every failure.
class LineReader {
 public:
  LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw ParseError(path + ": cannot open file");
  }

  bool next(json& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (line.empty()) continue;
      try {
        out = json::parse(line);
      } catch (const json::exception& e) {
        fail(std::string("invalid record: ") + e.what());
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_ + " line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::string path_;
  std::ifstream in_;
  long lineno_ = 0;
};

json expect_record(LineReader& reader, const char* kind) {
  json j;
  if (!reader.next(j)) reader.fail(std::string("unexpected end of file, wanted ") + kind + " record");
  if (!j.contains("record") || j["record"] != kind)
    reader.fail(std::string("expected ") + kind + " record");
  return j;
}

Vec read_x(LineReader& reader, const json& j, int d) {
  if (!j.contains("x") || !j["x"].is_array() || static_cast<int>(j["x"].size()) != d)
    reader.fail("sample is missing a " + std::to_string(d) + "-float x array");
  Vec x(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) x[static_cast<size_t>(k)] = j["x"][static_cast<size_t>(k)].get<double>();
  return x;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << body;
  if (!out) throw ParseError(path + ": write failed");
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& base_path) {
  const int n_l = corpus.labeled_x.rows;
  const int n_u = corpus.unlabeled_x.rows;

  std::ostringstream samples;
  samples << "{\"record\":\"header\",\"version\":1"
          << ",\"K\":" << corpus.K << ",\"K_total\":" << corpus.K_total << ",\"d\":" << corpus.d
          << ",\"n_labeled\":" << n_l << ",\"n_unlabeled\":" << n_u << ",\"cfg\":{"
          << "\"noise_ratio\":" << fmt_double(corpus.cfg.noise_ratio)
          << ",\"closed_classes\":" << corpus.cfg.closed_classes
          << ",\"labeled_ratio\":" << fmt_double(corpus.cfg.labeled_ratio)
          << ",\"usage_ratio\":" << fmt_double(corpus.cfg.usage_ratio) << ",\"seed\":" << corpus.cfg.seed
          << "}}\n";
  for (int i = 0; i < n_l; ++i) {
    samples << "{\"record\":\"sample\",\"id\":" << i << ",\"role\":\"labeled\",\"x\":"
            << fmt_array(corpus.labeled_x.row(i), corpus.d)
            << ",\"given_label\":" << corpus.labeled_y[static_cast<size_t>(i)] << "}\n";
  }
  for (int i = 0; i < n_u; ++i) {
    samples << "{\"record\":\"sample\",\"id\":" << n_l + i << ",\"role\":\"unlabeled\",\"x\":"
            << fmt_array(corpus.unlabeled_x.row(i), corpus.d) << "}\n";
  }
  write_file(base_path + ".samples.jsonl", samples.str());

  std::ostringstream prov;
  prov << "{\"record\":\"header\",\"version\":1,\"n\":" << n_l + n_u << "}\n";
  auto emit = [&](int id, const Provenance& p, const char* origin) {
    prov << "{\"record\":\"prov\",\"id\":" << id << ",\"true_class\":" << p.true_class
         << ",\"was_flipped\":" << (p.was_flipped ? "true" : "false")
         << ",\"is_open_set\":" << (p.is_open_set ? "true" : "false") << ",\"origin\":\"" << origin
         << "\"}\n";
  };
  for (int i = 0; i < n_l; ++i) emit(i, corpus.labeled_prov[static_cast<size_t>(i)], "labeled");
  for (int i = 0; i < n_u; ++i) emit(n_l + i, corpus.unlabeled_prov[static_cast<size_t>(i)], "unlabeled");
  write_file(base_path + ".provenance.jsonl", prov.str());
}

Corpus load_corpus(const std::string& base_path) {
  Corpus corpus;
  {
    LineReader reader(base_path + ".samples.jsonl");
    json h = expect_record(reader, "header");
    try {
      corpus.K = h.at("K").get<int>();
      corpus.K_total = h.at("K_total").get<int>();
      corpus.d = h.at("d").get<int>();
      const json& cfg = h.at("cfg");
      corpus.cfg.noise_ratio = cfg.at("noise_ratio").get<double>();
      corpus.cfg.closed_classes = cfg.at("closed_classes").get<int>();
      corpus.cfg.labeled_ratio = cfg.at("labeled_ratio").get<double>();
      corpus.cfg.usage_ratio = cfg.at("usage_ratio").get<double>();
      corpus.cfg.seed = cfg.at("seed").get<uint64_t>();
    } catch (const json::exception& e) {
      reader.fail(std::string("bad header: ") + e.what());
    }
    const int n_l = h.at("n_labeled").get<int>();
    const int n_u = h.at("n_unlabeled").get<int>();
    if (n_l <= 0 || n_u < 0 || corpus.d <= 0) reader.fail("header counts out of range");

    corpus.labeled_x.resize(n_l, corpus.d);
    corpus.labeled_y.resize(static_cast<size_t>(n_l));
    corpus.unlabeled_x.resize(n_u, corpus.d);
    for (int i = 0; i < n_l + n_u; ++i) {
      json j = expect_record(reader, "sample");
      if (!j.contains("id") || j["id"].get<int>() != i) reader.fail("sample id out of order");
      const std::string role = j.value("role", "");
      Vec x = read_x(reader, j, corpus.d);
      if (i < n_l) {
        if (role != "labeled") reader.fail("expected a labeled sample");
        if (!j.contains("given_label")) reader.fail("labeled sample lacks given_label");
        int y = j["given_label"].get<int>();
        if (y < 0 || y >= corpus.K) reader.fail("given_label out of range");
        std::copy(x.begin(), x.end(), corpus.labeled_x.row(i));
        corpus.labeled_y[static_cast<size_t>(i)] = y;
      } else {
        if (role != "unlabeled") reader.fail("expected an unlabeled sample");
        std::copy(x.begin(), x.end(), corpus.unlabeled_x.row(i - n_l));
      }
    }
    json extra;
    if (reader.next(extra)) reader.fail("trailing data after the last sample");
  }
  {
    LineReader reader(base_path + ".provenance.jsonl");
    json h = expect_record(reader, "header");
    const int n = h.at("n").get<int>();
    const int n_l = corpus.labeled_x.rows;
    if (n != n_l + corpus.unlabeled_x.rows)
      reader.fail("provenance count does not match the sample file");
    corpus.labeled_prov.resize(static_cast<size_t>(n_l));
    corpus.unlabeled_prov.resize(static_cast<size_t>(corpus.unlabeled_x.rows));
    for (int i = 0; i < n; ++i) {
      json j = expect_record(reader, "prov");
      if (!j.contains("id") || j["id"].get<int>() != i) reader.fail("provenance id out of order");
      Provenance p;
      try {
        p.true_class = j.at("true_class").get<int>();
        p.was_flipped = j.at("was_flipped").get<bool>();
        p.is_open_set = j.at("is_open_set").get<bool>();
      } catch (const json::exception& e) {
        reader.fail(std::string("bad provenance record: ") + e.what());
      }
      if (i < n_l) {
        corpus.labeled_prov[static_cast<size_t>(i)] = p;
      } else {
        corpus.unlabeled_prov[static_cast<size_t>(i - n_l)] = p;
      }
    }
  }
  return corpus;
}

void save_eval_set(const EvalSet& eval, const std::string& path) {
  std::ostringstream out;
  out << "{\"record\":\"header\",\"version\":1,\"K\":" << eval.K << ",\"d\":" << eval.d
      << ",\"n\":" << eval.x.rows << "}\n";
  for (int i = 0; i < eval.x.rows; ++i) {
    out << "{\"record\":\"eval\",\"id\":" << i << ",\"x\":" << fmt_array(eval.x.row(i), eval.d)
        << ",\"label\":" << eval.labels[static_cast<size_t>(i)] << "}\n";
  }
  write_file(path, out.str());
}

EvalSet load_eval_set(const std::string& path) {
  LineReader reader(path);
  json h = expect_record(reader, "header");
  EvalSet eval;
  eval.K = h.at("K").get<int>();
  eval.d = h.at("d").get<int>();
  const int n = h.at("n").get<int>();
  if (eval.K <= 0 || eval.d <= 0 || n <= 0) reader.fail("header counts out of range");
  eval.x.resize(n, eval.d);
  eval.labels.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    json j = expect_record(reader, "eval");
    if (!j.contains("id") || j["id"].get<int>() != i) reader.fail("eval id out of order");
    Vec x = read_x(reader, j, eval.d);
    std::copy(x.begin(), x.end(), eval.x.row(i));
    int y = j.at("label").get<int>();
    if (y < 0 || y >= eval.K) reader.fail("label out of range");
    eval.labels[static_cast<size_t>(i)] = y;
  }
  return eval;
}

}  // namespace scgan
