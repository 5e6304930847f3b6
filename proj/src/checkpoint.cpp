#include "scgan/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace scgan {

namespace {

void write_store(std::ostream& out, const char* name, const ParamStore& store) {
  out << "store " << name << " " << store.tensors().size() << " " << store.adam_t << "\n";
  char buf[40];
  for (const Tensor& t : store.tensors()) {
    out << "tensor " << t.name << " " << t.value.rows << " " << t.value.cols << "\n";
    for (const Matrix* mat : {&t.value, &t.m, &t.v}) {
      for (int i = 0; i < mat->rows; ++i) {
        const double* row = mat->row(i);
        for (int j = 0; j < mat->cols; ++j) {
          std::snprintf(buf, sizeof(buf), "%a", row[j]);
          out << buf << (j + 1 < mat->cols ? " " : "");
        }
        out << "\n";
      }
    }
  }
}

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw ParseError(path + ": cannot open checkpoint");
  }

  std::string line(const char* what) {
    std::string s;
    if (!std::getline(in_, s)) fail(std::string("unexpected end of file, wanted ") + what);
    ++lineno_;
    return s;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(path_ + " line " + std::to_string(lineno_) + ": " + what);
  }

  void read_matrix(Matrix& m) {
    for (int i = 0; i < m.rows; ++i) {
      std::istringstream row(line("tensor row"));
      for (int j = 0; j < m.cols; ++j) {
        std::string tok;
        if (!(row >> tok)) fail("short tensor row");
        char* end = nullptr;
        m.at(i, j) = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) fail("bad float '" + tok + "'");
      }
    }
  }

  void read_store(const char* name, ParamStore& store) {
    std::istringstream head(line("store header"));
    std::string kw, got;
    size_t count = 0;
    long adam_t = 0;
    head >> kw >> got >> count >> adam_t;
    if (kw != "store" || got != name) fail(std::string("expected store ") + name);
    if (count != store.tensors().size()) fail("tensor count does not match the model");
    store.adam_t = adam_t;
    for (Tensor& t : store.tensors()) {
      std::istringstream th(line("tensor header"));
      std::string tkw, tname;
      int rows = 0, cols = 0;
      th >> tkw >> tname >> rows >> cols;
      if (tkw != "tensor" || tname != t.name) fail("expected tensor " + t.name);
      if (rows != t.value.rows || cols != t.value.cols) fail("tensor shape mismatch for " + t.name);
      read_matrix(t.value);
      read_matrix(t.m);
      read_matrix(t.v);
    }
  }

 private:
  std::string path_;
  std::ifstream in_;
  long lineno_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& state) {
  std::ostringstream out;
  out << "scgan-checkpoint v1\n";
  out << "meta g_steps " << state.g_steps_done << "\n";
  out << "meta d_steps " << state.d_steps_done << "\n";
  out << "rng draw " << state.draw_rng.save_state() << "\n";
  out << "sampler labeled " << state.labeled_sampler.save_state() << "\n";
  out << "sampler unlabeled " << state.unlabeled_sampler.save_state() << "\n";
  write_store(out, "gen", state.models.gen_params);
  write_store(out, "disc", state.models.disc_params);
  out << "end\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ParseError(path + ": cannot open for writing");
  f << out.str();
  if (!f) throw ParseError(path + ": write failed");
}

TrainState load_checkpoint(const std::string& path, const CorpusView& view,
                           const TrainConfig& cfg) {
  TrainState state = TrainState::create(view, cfg);
  CheckpointReader reader(path);

  if (reader.line("magic") != "scgan-checkpoint v1") reader.fail("bad magic");

  auto meta_long = [&](const char* key) {
    std::istringstream is(reader.line("meta"));
    std::string kw, got;
    long value = 0;
    is >> kw >> got >> value;
    if (kw != "meta" || got != key) reader.fail(std::string("expected meta ") + key);
    return value;
  };
  state.g_steps_done = meta_long("g_steps");
  state.d_steps_done = meta_long("d_steps");

  {
    std::string l = reader.line("rng");
    const std::string prefix = "rng draw ";
    if (l.rfind(prefix, 0) != 0) reader.fail("expected rng draw");
    state.draw_rng.load_state(l.substr(prefix.size()));
  }
  for (auto* sampler : {&state.labeled_sampler, &state.unlabeled_sampler}) {
    std::string l = reader.line("sampler");
    size_t sp = l.find(' ');
    sp = l.find(' ', sp + 1);
    if (l.rfind("sampler ", 0) != 0 || sp == std::string::npos) reader.fail("expected sampler");
    sampler->load_state(l.substr(sp + 1));
  }
  reader.read_store("gen", state.models.gen_params);
  reader.read_store("disc", state.models.disc_params);
  if (reader.line("end") != "end") reader.fail("missing end marker");
  return state;
}

}  // namespace scgan
