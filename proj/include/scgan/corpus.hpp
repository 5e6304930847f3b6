#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scgan/matrix.hpp"
#include "scgan/rng.hpp"

namespace scgan {

enum class Layout { ring, grid };

struct MixtureComponent {
  Vec mean;
  double var = 0.25;  // isotropic
};

// Fully labeled clean dataset over all K_total classes (closed + open).
struct CleanDataset {
  Matrix x;
  std::vector<int> labels;
  int K_total = 0;
  int d = 0;
  std::vector<MixtureComponent> mixture;
};

struct CorruptionConfig {
  double noise_ratio = 0.1;
  int closed_classes = 8;  // K
  double labeled_ratio = 0.2;
  double usage_ratio = 1.0;
  uint64_t seed = 1;

  // Throws ConfigError naming the offending field.
  void validate(int k_total) const;
};

// Hidden ground truth, available to evaluation only.
struct Provenance {
  int true_class = 0;
  bool was_flipped = false;
  bool is_open_set = false;
};

// What the training loop is allowed to see. No provenance fields, by design.
struct CorpusView {
  const Matrix* labeled_x = nullptr;
  const std::vector<int>* labeled_y = nullptr;
  const Matrix* unlabeled_x = nullptr;
  int K = 0;
  int d = 0;

  int n_labeled() const { return labeled_x ? labeled_x->rows : 0; }
  int n_unlabeled() const { return unlabeled_x ? unlabeled_x->rows : 0; }
};

struct Corpus {
  Matrix labeled_x;
  std::vector<int> labeled_y;  // given noisy labels, one-hot over [0, K)
  Matrix unlabeled_x;
  int K = 0;
  int K_total = 0;
  int d = 0;
  CorruptionConfig cfg;
  std::vector<Provenance> labeled_prov;    // aligned with labeled rows
  std::vector<Provenance> unlabeled_prov;  // aligned with unlabeled rows

  CorpusView view() const {
    return CorpusView{&labeled_x, &labeled_y, &unlabeled_x, K, d};
  }
};

// Clean held-out reference samples over the closed-set classes; drives the
// distance metrics and the oracle classifier.
struct EvalSet {
  Matrix x;
  std::vector<int> labels;
  int K = 0;
  int d = 0;
};

// Class means on a radius-4 ring (or an axis-aligned grid with spacing 4),
// isotropic covariance 0.25 I. Deterministic in the seed.
CleanDataset generate_synthetic_mixture(int k_total, int per_class, int d, Layout layout,
                                        uint64_t seed);

// Flips each label independently with probability noise_ratio; the replacement
// is uniform over the other K_total - 1 classes. Returns flip flags.
std::pair<CleanDataset, std::vector<bool>> inject_label_noise(const CleanDataset& ds,
                                                              double noise_ratio, Rng& rng);

// Partition by noisy label: classes [0, K) are closed-set.
struct ClosedOpenSplit {
  std::vector<int> closed_idx;
  std::vector<int> open_idx;
};
ClosedOpenSplit split_closed_open(const CleanDataset& noisy, int closed_classes);

// Labeled = labeled_ratio of the closed part (keeping noisy labels);
// unlabeled = remaining closed samples plus usage_ratio of the open part,
// labels stripped. Subset sizes round half to even; selection is a seeded
// shuffle followed by a prefix take.
Corpus partition_labeled_unlabeled(const CleanDataset& clean, const CleanDataset& noisy,
                                   const std::vector<bool>& flips, const ClosedOpenSplit& split,
                                   const CorruptionConfig& cfg, Rng& rng);

// The full pipeline: noise injection, closed/open split, partition. Pure in
// (clean, cfg).
Corpus build_corpus(const CleanDataset& clean, const CorruptionConfig& cfg);

// Fresh clean draws from the closed-set mixture components.
EvalSet make_eval_split(const CleanDataset& clean, int closed_classes, int per_class,
                        uint64_t seed);

// Rounds half to even on the scaled count.
long round_half_even(double x);

// --- file formats -----------------------------------------------------------
// Line-delimited, self-describing text. base + ".samples.jsonl" holds the
// header and sample records, base + ".provenance.jsonl" the hidden ground
// truth, base + ".eval.jsonl" the clean reference split. Floats carry 17
// significant digits so reloading is exact.

void save_corpus(const Corpus& corpus, const std::string& base_path);
Corpus load_corpus(const std::string& base_path);

void save_eval_set(const EvalSet& eval, const std::string& path);
EvalSet load_eval_set(const std::string& path);

bool corpus_equal(const Corpus& a, const Corpus& b);

}  // namespace scgan
