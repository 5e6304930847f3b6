#include "scgan/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scgan {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

long round_half_even(double x) {
  const double f = std::floor(x);
  const double frac = x - f;
  const long lf = static_cast<long>(f);
  if (frac > 0.5) return lf + 1;
  if (frac < 0.5) return lf;
  return (lf % 2 == 0) ? lf : lf + 1;
}

void CorruptionConfig::validate(int k_total) const {
  if (noise_ratio < 0.0 || noise_ratio > 1.0)
    throw ConfigError("noise_ratio must be in [0, 1]");
  if (closed_classes < 1 || closed_classes > k_total)
    throw ConfigError("closed_classes must be in [1, K_total]");
  if (labeled_ratio <= 0.0 || labeled_ratio > 1.0)
    throw ConfigError("labeled_ratio must be in (0, 1]");
  if (usage_ratio < 0.0 || usage_ratio > 1.0)
    throw ConfigError("usage_ratio must be in [0, 1]");
}

CleanDataset generate_synthetic_mixture(int k_total, int per_class, int d, Layout layout,
                                        uint64_t seed) {
  if (k_total < 2) throw ConfigError("k_total must be at least 2");
  if (per_class < 1) throw ConfigError("per_class must be at least 1");
  if (d < 2) throw ConfigError("dim must be at least 2");

  CleanDataset ds;
  ds.K_total = k_total;
  ds.d = d;
  ds.mixture.resize(static_cast<size_t>(k_total));
  const double radius = 4.0;
  const double spacing = 4.0;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k_total))));
  for (int k = 0; k < k_total; ++k) {
    MixtureComponent& c = ds.mixture[static_cast<size_t>(k)];
    c.mean.assign(static_cast<size_t>(d), 0.0);
    c.var = 0.25;
    if (layout == Layout::ring) {
      const double angle = 2.0 * kPi * k / k_total;
      c.mean[0] = radius * std::cos(angle);
      c.mean[1] = radius * std::sin(angle);
    } else {
      c.mean[0] = spacing * (k % side);
      c.mean[1] = spacing * (k / side);
    }
  }

  Rng rng = Rng::stream(seed, "mixture");
  ds.x.resize(k_total * per_class, d);
  ds.labels.resize(static_cast<size_t>(k_total) * per_class);
  const double sigma = 0.5;  // sqrt(0.25)
  int row = 0;
  for (int k = 0; k < k_total; ++k) {
    const Vec& mean = ds.mixture[static_cast<size_t>(k)].mean;
    for (int i = 0; i < per_class; ++i, ++row) {
      double* x = ds.x.row(row);
      for (int j = 0; j < d; ++j) x[j] = mean[static_cast<size_t>(j)] + sigma * rng.normal();
      ds.labels[static_cast<size_t>(row)] = k;
    }
  }
  return ds;
}

std::pair<CleanDataset, std::vector<bool>> inject_label_noise(const CleanDataset& ds,
                                                              double noise_ratio, Rng& rng) {
  if (noise_ratio < 0.0 || noise_ratio > 1.0)
    throw ConfigError("noise_ratio must be in [0, 1]");
  CleanDataset out = ds;
  std::vector<bool> flipped(ds.labels.size(), false);
  for (size_t i = 0; i < ds.labels.size(); ++i) {
    if (rng.uniform() < noise_ratio) {
      // Uniform over the other K_total - 1 classes.
      int draw = rng.index(ds.K_total - 1);
      int old_label = ds.labels[i];
      out.labels[i] = draw >= old_label ? draw + 1 : draw;
      flipped[i] = true;
    }
  }
  return {std::move(out), std::move(flipped)};
}

ClosedOpenSplit split_closed_open(const CleanDataset& noisy, int closed_classes) {
  if (closed_classes < 1 || closed_classes > noisy.K_total)
    throw ConfigError("closed_classes must be in [1, K_total]");
  ClosedOpenSplit split;
  for (size_t i = 0; i < noisy.labels.size(); ++i) {
    if (noisy.labels[i] < closed_classes) {
      split.closed_idx.push_back(static_cast<int>(i));
    } else {
      split.open_idx.push_back(static_cast<int>(i));
    }
  }
  return split;
}

Corpus partition_labeled_unlabeled(const CleanDataset& clean, const CleanDataset& noisy,
                                   const std::vector<bool>& flips, const ClosedOpenSplit& split,
                                   const CorruptionConfig& cfg, Rng& rng) {
  cfg.validate(noisy.K_total);
  if (split.closed_idx.empty()) throw ConfigError("closed part is empty; nothing to label");

  const long n_closed = static_cast<long>(split.closed_idx.size());
  const long n_lab = round_half_even(cfg.labeled_ratio * static_cast<double>(n_closed));
  if (n_lab <= 0) throw ConfigError("labeled_ratio selects an empty labeled set");
  const long n_open_use =
      round_half_even(cfg.usage_ratio * static_cast<double>(split.open_idx.size()));

  std::vector<int> closed = split.closed_idx;
  rng.shuffle(closed);
  std::vector<int> open = split.open_idx;
  rng.shuffle(open);

  Corpus corpus;
  corpus.K = cfg.closed_classes;
  corpus.K_total = noisy.K_total;
  corpus.d = noisy.d;
  corpus.cfg = cfg;

  const long n_unlab = n_closed - n_lab + n_open_use;
  corpus.labeled_x.resize(static_cast<int>(n_lab), noisy.d);
  corpus.labeled_y.resize(static_cast<size_t>(n_lab));
  corpus.unlabeled_x.resize(static_cast<int>(n_unlab), noisy.d);
  corpus.labeled_prov.resize(static_cast<size_t>(n_lab));
  corpus.unlabeled_prov.resize(static_cast<size_t>(n_unlab));

  auto prov_of = [&](int src) {
    Provenance p;
    p.true_class = clean.labels[static_cast<size_t>(src)];
    p.was_flipped = flips[static_cast<size_t>(src)];
    p.is_open_set = p.true_class >= cfg.closed_classes;
    return p;
  };

  for (long i = 0; i < n_lab; ++i) {
    const int src = closed[static_cast<size_t>(i)];
    std::copy(noisy.x.row(src), noisy.x.row(src) + noisy.d, corpus.labeled_x.row(static_cast<int>(i)));
    corpus.labeled_y[static_cast<size_t>(i)] = noisy.labels[static_cast<size_t>(src)];
    corpus.labeled_prov[static_cast<size_t>(i)] = prov_of(src);
  }
  long u = 0;
  for (long i = n_lab; i < n_closed; ++i, ++u) {
    const int src = closed[static_cast<size_t>(i)];
    std::copy(noisy.x.row(src), noisy.x.row(src) + noisy.d, corpus.unlabeled_x.row(static_cast<int>(u)));
    corpus.unlabeled_prov[static_cast<size_t>(u)] = prov_of(src);
  }
  for (long i = 0; i < n_open_use; ++i, ++u) {
    const int src = open[static_cast<size_t>(i)];
    std::copy(noisy.x.row(src), noisy.x.row(src) + noisy.d, corpus.unlabeled_x.row(static_cast<int>(u)));
    corpus.unlabeled_prov[static_cast<size_t>(u)] = prov_of(src);
  }
  return corpus;
}

Corpus build_corpus(const CleanDataset& clean, const CorruptionConfig& cfg) {
  cfg.validate(clean.K_total);
  Rng noise_rng = Rng::stream(cfg.seed, "noise");
  auto [noisy, flips] = inject_label_noise(clean, cfg.noise_ratio, noise_rng);
  ClosedOpenSplit split = split_closed_open(noisy, cfg.closed_classes);
  Rng part_rng = Rng::stream(cfg.seed, "partition");
  return partition_labeled_unlabeled(clean, noisy, flips, split, cfg, part_rng);
}

EvalSet make_eval_split(const CleanDataset& clean, int closed_classes, int per_class,
                        uint64_t seed) {
  if (closed_classes < 1 || closed_classes > clean.K_total)
    throw ConfigError("closed_classes must be in [1, K_total]");
  if (per_class < 1) throw ConfigError("eval_per_class must be at least 1");
  EvalSet eval;
  eval.K = closed_classes;
  eval.d = clean.d;
  eval.x.resize(closed_classes * per_class, clean.d);
  eval.labels.resize(static_cast<size_t>(closed_classes) * per_class);
  Rng rng = Rng::stream(seed, "eval-split");
  int row = 0;
  for (int k = 0; k < closed_classes; ++k) {
    const MixtureComponent& c = clean.mixture[static_cast<size_t>(k)];
    const double sigma = std::sqrt(c.var);
    for (int i = 0; i < per_class; ++i, ++row) {
      double* x = eval.x.row(row);
      for (int j = 0; j < clean.d; ++j) x[j] = c.mean[static_cast<size_t>(j)] + sigma * rng.normal();
      eval.labels[static_cast<size_t>(row)] = k;
    }
  }
  return eval;
}

bool corpus_equal(const Corpus& a, const Corpus& b) {
  auto prov_eq = [](const Provenance& x, const Provenance& y) {
    return x.true_class == y.true_class && x.was_flipped == y.was_flipped &&
           x.is_open_set == y.is_open_set;
  };
  if (a.K != b.K || a.K_total != b.K_total || a.d != b.d) return false;
  if (a.labeled_y != b.labeled_y) return false;
  if (a.labeled_x.data != b.labeled_x.data || a.unlabeled_x.data != b.unlabeled_x.data)
    return false;
  if (a.labeled_prov.size() != b.labeled_prov.size() ||
      a.unlabeled_prov.size() != b.unlabeled_prov.size())
    return false;
  for (size_t i = 0; i < a.labeled_prov.size(); ++i)
    if (!prov_eq(a.labeled_prov[i], b.labeled_prov[i])) return false;
  for (size_t i = 0; i < a.unlabeled_prov.size(); ++i)
    if (!prov_eq(a.unlabeled_prov[i], b.unlabeled_prov[i])) return false;
  return true;
}

}  // namespace scgan
