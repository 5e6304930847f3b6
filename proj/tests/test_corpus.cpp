#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "scgan/corpus.hpp"

using namespace scgan;
namespace fs = std::filesystem;

namespace {

std::string temp_base(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / "scgan_corpus_tests";
  fs::create_directories(dir);
  return (dir / tag).string();
}

}  // namespace

TEST_CASE("ring mixture puts class means on a radius-4 circle") {
  CleanDataset ds = generate_synthetic_mixture(10, 100, 2, Layout::ring, 1);
  CHECK(ds.x.rows == 1000);
  CHECK(ds.labels.size() == 1000);
  CHECK(ds.mixture.size() == 10);
  for (const MixtureComponent& c : ds.mixture) {
    const double r = std::sqrt(c.mean[0] * c.mean[0] + c.mean[1] * c.mean[1]);
    CHECK(r == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(c.var == 0.25);
  }
  // Equally spaced: consecutive angles differ by 2 pi / 10.
  for (int k = 0; k + 1 < 10; ++k) {
    const double a0 = std::atan2(ds.mixture[k].mean[1], ds.mixture[k].mean[0]);
    const double a1 = std::atan2(ds.mixture[k + 1].mean[1], ds.mixture[k + 1].mean[0]);
    double diff = a1 - a0;
    while (diff < 0) diff += 2 * 3.14159265358979323846;
    CHECK(diff == doctest::Approx(2 * 3.14159265358979323846 / 10).epsilon(1e-9));
  }
}

TEST_CASE("two ring classes sit at angles 0 and pi") {
  CleanDataset ds = generate_synthetic_mixture(2, 1, 2, Layout::ring, 7);
  CHECK(ds.x.rows == 2);
  CHECK(ds.mixture[0].mean[0] == doctest::Approx(4.0));
  CHECK(ds.mixture[0].mean[1] == doctest::Approx(0.0));
  CHECK(ds.mixture[1].mean[0] == doctest::Approx(-4.0));
  CHECK(ds.mixture[1].mean[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("per-class empirical means land near the specified means") {
  CleanDataset ds = generate_synthetic_mixture(10, 100, 2, Layout::ring, 1);
  for (int k = 0; k < 10; ++k) {
    double mx = 0.0, my = 0.0;
    int n = 0;
    for (int i = 0; i < ds.x.rows; ++i) {
      if (ds.labels[static_cast<size_t>(i)] != k) continue;
      mx += ds.x.at(i, 0);
      my += ds.x.at(i, 1);
      n += 1;
    }
    CHECK(n == 100);
    mx /= n;
    my /= n;
    // sigma/sqrt(100) = 0.05 per axis; 0.1 is a two-sigma box.
    CHECK(std::abs(mx - ds.mixture[k].mean[0]) < 0.1 * 2);
    CHECK(std::abs(my - ds.mixture[k].mean[1]) < 0.1 * 2);
  }
}

TEST_CASE("mixture generation is deterministic and validates inputs") {
  CleanDataset a = generate_synthetic_mixture(5, 20, 3, Layout::grid, 42);
  CleanDataset b = generate_synthetic_mixture(5, 20, 3, Layout::grid, 42);
  CHECK(a.x.data == b.x.data);
  CHECK(a.labels == b.labels);
  CHECK_THROWS_AS(generate_synthetic_mixture(1, 10, 2, Layout::ring, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic_mixture(4, 0, 2, Layout::ring, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic_mixture(4, 10, 1, Layout::ring, 1), ConfigError);
}

TEST_CASE("zero noise leaves labels untouched") {
  CleanDataset ds = generate_synthetic_mixture(6, 50, 2, Layout::ring, 2);
  Rng rng(1);
  auto [noisy, flips] = inject_label_noise(ds, 0.0, rng);
  CHECK(noisy.labels == ds.labels);
  for (bool f : flips) CHECK_FALSE(f);
}

TEST_CASE("full noise with two classes swaps every label") {
  CleanDataset ds = generate_synthetic_mixture(2, 100, 2, Layout::ring, 3);
  Rng rng(4);
  auto [noisy, flips] = inject_label_noise(ds, 1.0, rng);
  for (size_t i = 0; i < ds.labels.size(); ++i) {
    CHECK(flips[i]);
    CHECK(noisy.labels[i] == 1 - ds.labels[i]);
  }
}

TEST_CASE("flip rate is binomial and flip targets are uniform") {
  const int k_total = 10, n = 100000;
  CleanDataset ds = generate_synthetic_mixture(k_total, n / k_total, 2, Layout::ring, 5);
  const double ratio = 0.3;
  Rng rng(6);
  auto [noisy, flips] = inject_label_noise(ds, ratio, rng);

  long flipped = 0;
  for (bool f : flips) flipped += f ? 1 : 0;
  const double sigma = std::sqrt(n * ratio * (1.0 - ratio));
  CHECK(std::abs(flipped - n * ratio) < 3.0 * sigma);

  // Flips never keep the original label; conditional on flipping, the offset
  // (new - old) mod K is uniform over 1..K-1.
  std::vector<long> offset_counts(static_cast<size_t>(k_total), 0);
  for (size_t i = 0; i < flips.size(); ++i) {
    if (!flips[i]) continue;
    CHECK(noisy.labels[i] != ds.labels[i]);
    const int offset = ((noisy.labels[i] - ds.labels[i]) % k_total + k_total) % k_total;
    offset_counts[static_cast<size_t>(offset)] += 1;
  }
  CHECK(offset_counts[0] == 0);
  const double expected = static_cast<double>(flipped) / (k_total - 1);
  double chi2 = 0.0;
  for (int off = 1; off < k_total; ++off) {
    const double diff = offset_counts[static_cast<size_t>(off)] - expected;
    chi2 += diff * diff / expected;
  }
  const double dof = k_total - 2;  // k-1 cells, one constraint
  CHECK(chi2 < dof + 3.0 * std::sqrt(2.0 * dof));
}

TEST_CASE("per-sample flip frequency over many seeds approaches the noise ratio") {
  CleanDataset ds = generate_synthetic_mixture(5, 4, 2, Layout::ring, 6);
  const double ratio = 0.3;
  const int trials = 2000;
  long flips_of_first = 0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(static_cast<uint64_t>(t) + 1000);
    auto [noisy, flips] = inject_label_noise(ds, ratio, rng);
    flips_of_first += flips[0] ? 1 : 0;
  }
  const double sigma = std::sqrt(trials * ratio * (1.0 - ratio));
  CHECK(std::abs(flips_of_first - trials * ratio) < 3.0 * sigma);
}

TEST_CASE("closed/open split partitions by the noisy label") {
  CleanDataset ds = generate_synthetic_mixture(8, 40, 2, Layout::ring, 7);
  Rng rng(8);
  auto [noisy, flips] = inject_label_noise(ds, 0.4, rng);

  SUBCASE("K equal to K_total leaves the open part empty") {
    ClosedOpenSplit split = split_closed_open(noisy, 8);
    CHECK(split.open_idx.empty());
    CHECK(split.closed_idx.size() == static_cast<size_t>(noisy.x.rows));
  }

  SUBCASE("no noise puts exactly the true closed classes in the closed part") {
    auto [clean_noisy, clean_flips] = inject_label_noise(ds, 0.0, rng);
    ClosedOpenSplit split = split_closed_open(clean_noisy, 5);
    for (int i : split.closed_idx) CHECK(ds.labels[static_cast<size_t>(i)] < 5);
    for (int i : split.open_idx) CHECK(ds.labels[static_cast<size_t>(i)] >= 5);
  }

  SUBCASE("the two parts form a partition") {
    ClosedOpenSplit split = split_closed_open(noisy, 5);
    std::vector<bool> seen(static_cast<size_t>(noisy.x.rows), false);
    for (int i : split.closed_idx) {
      CHECK_FALSE(seen[static_cast<size_t>(i)]);
      seen[static_cast<size_t>(i)] = true;
      CHECK(noisy.labels[static_cast<size_t>(i)] < 5);
    }
    for (int i : split.open_idx) {
      CHECK_FALSE(seen[static_cast<size_t>(i)]);
      seen[static_cast<size_t>(i)] = true;
      CHECK(noisy.labels[static_cast<size_t>(i)] >= 5);
    }
    for (bool s : seen) CHECK(s);
  }
}

TEST_CASE("the 200-class split matches its expectation within three sigma") {
  // 200 classes x 500 samples, K = 150, 10% label flips among all classes.
  // Flips into and out of the closed set balance, so E|closed| = 75000.
  const int k_total = 200, per_class = 500, k_closed = 150;
  const double ratio = 0.1;
  CleanDataset ds = generate_synthetic_mixture(k_total, per_class, 2, Layout::ring, 9);
  Rng rng(10);
  auto [noisy, flips] = inject_label_noise(ds, ratio, rng);
  ClosedOpenSplit split = split_closed_open(noisy, k_closed);

  const double p_closed_stay = (1.0 - ratio) + ratio * (k_closed - 1) / (k_total - 1.0);
  const double p_open_enter = ratio * static_cast<double>(k_closed) / (k_total - 1.0);
  const double n_closed_true = static_cast<double>(k_closed) * per_class;
  const double n_open_true = static_cast<double>(k_total - k_closed) * per_class;
  const double expectation = n_closed_true * p_closed_stay + p_open_enter * n_open_true;
  const double variance = n_closed_true * p_closed_stay * (1 - p_closed_stay) +
                          n_open_true * p_open_enter * (1 - p_open_enter);
  CHECK(expectation == doctest::Approx(75000.0).epsilon(1e-6));
  CHECK(std::abs(static_cast<double>(split.closed_idx.size()) - expectation) <
        3.0 * std::sqrt(variance));
}

TEST_CASE("partition sizes: counting identity and degenerate cases") {
  CleanDataset ds = generate_synthetic_mixture(10, 100, 2, Layout::ring, 11);
  Rng noise_rng(14);
  auto [noisy, flips] = inject_label_noise(ds, 0.3, noise_rng);
  ClosedOpenSplit split = split_closed_open(noisy, 7);

  for (double lr : {0.2, 0.33, 1.0}) {
    for (double ur : {0.0, 0.5, 1.0}) {
      CorruptionConfig cfg;
      cfg.noise_ratio = 0.3;
      cfg.closed_classes = 7;
      cfg.labeled_ratio = lr;
      cfg.usage_ratio = ur;
      cfg.seed = 15;
      Rng part_rng(16);
      Corpus corpus = partition_labeled_unlabeled(ds, noisy, flips, split, cfg, part_rng);
      const long n_closed = static_cast<long>(split.closed_idx.size());
      const long n_open = static_cast<long>(split.open_idx.size());
      const long n_lab = round_half_even(lr * n_closed);
      CHECK(corpus.labeled_x.rows == n_lab);
      CHECK(corpus.unlabeled_x.rows == n_closed - n_lab + round_half_even(ur * n_open));
      if (ur == 0.0)
        for (const Provenance& p : corpus.unlabeled_prov) (void)p;  // open part excluded below
    }
  }

  SUBCASE("usage zero keeps only closed samples unlabeled") {
    CorruptionConfig cfg;
    cfg.noise_ratio = 0.3;
    cfg.closed_classes = 7;
    cfg.labeled_ratio = 0.25;
    cfg.usage_ratio = 0.0;
    cfg.seed = 17;
    Rng part_rng(18);
    Corpus corpus = partition_labeled_unlabeled(ds, noisy, flips, split, cfg, part_rng);
    // Every unlabeled sample came from the closed part: its noisy label was a
    // closed class. Openness of the true class is still possible.
    CHECK(corpus.unlabeled_x.rows ==
          static_cast<int>(split.closed_idx.size()) - corpus.labeled_x.rows);
  }

  SUBCASE("labeled_ratio one with usage zero gives an empty unlabeled pool") {
    CorruptionConfig cfg;
    cfg.noise_ratio = 0.3;
    cfg.closed_classes = 7;
    cfg.labeled_ratio = 1.0;
    cfg.usage_ratio = 0.0;
    cfg.seed = 19;
    Rng part_rng(20);
    Corpus corpus = partition_labeled_unlabeled(ds, noisy, flips, split, cfg, part_rng);
    CHECK(corpus.unlabeled_x.rows == 0);
    CHECK(corpus.labeled_x.rows == static_cast<int>(split.closed_idx.size()));
  }
}

TEST_CASE("the 200-class reference split: 15000 labeled and 85000 unlabeled") {
  // 200 classes x 500, no noise so the closed part is exactly 150 x 500 =
  // 75000; 20% labeled and full open usage gives 15000/85000.
  CleanDataset ds = generate_synthetic_mixture(200, 500, 2, Layout::ring, 21);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.0;
  cfg.closed_classes = 150;
  cfg.labeled_ratio = 0.2;
  cfg.usage_ratio = 1.0;
  cfg.seed = 22;
  Corpus corpus = build_corpus(ds, cfg);
  CHECK(corpus.labeled_x.rows == 15000);
  CHECK(corpus.unlabeled_x.rows == 85000);
}

TEST_CASE("identity pipeline reproduces the clean dataset") {
  CleanDataset ds = generate_synthetic_mixture(6, 30, 2, Layout::ring, 23);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.0;
  cfg.closed_classes = 6;
  cfg.labeled_ratio = 1.0;
  cfg.usage_ratio = 0.0;
  cfg.seed = 24;
  Corpus corpus = build_corpus(ds, cfg);
  CHECK(corpus.labeled_x.rows == ds.x.rows);
  CHECK(corpus.unlabeled_x.rows == 0);
  // Same multiset of (x, label) pairs; order is shuffled.
  std::multimap<double, int> expected, got;
  for (int i = 0; i < ds.x.rows; ++i) expected.insert({ds.x.at(i, 0), ds.labels[static_cast<size_t>(i)]});
  for (int i = 0; i < corpus.labeled_x.rows; ++i)
    got.insert({corpus.labeled_x.at(i, 0), corpus.labeled_y[static_cast<size_t>(i)]});
  CHECK(expected == got);
  for (const Provenance& p : corpus.labeled_prov) {
    CHECK_FALSE(p.was_flipped);
    CHECK_FALSE(p.is_open_set);
  }
}

TEST_CASE("build_corpus is deterministic in (clean, cfg)") {
  CleanDataset ds = generate_synthetic_mixture(10, 80, 2, Layout::ring, 25);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.5;
  cfg.closed_classes = 8;
  cfg.labeled_ratio = 0.2;
  cfg.usage_ratio = 1.0;
  cfg.seed = 26;
  Corpus a = build_corpus(ds, cfg);
  Corpus b = build_corpus(ds, cfg);
  CHECK(corpus_equal(a, b));
}

TEST_CASE("provenance true-class histogram matches the clean data") {
  CleanDataset ds = generate_synthetic_mixture(10, 80, 2, Layout::ring, 27);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.4;
  cfg.closed_classes = 8;
  cfg.labeled_ratio = 0.5;
  cfg.usage_ratio = 1.0;
  cfg.seed = 28;
  Corpus corpus = build_corpus(ds, cfg);

  // With usage 1.0 every sample is selected exactly once, so true-class counts
  // must equal the clean histogram.
  std::vector<int> clean_hist(10, 0), prov_hist(10, 0);
  for (int label : ds.labels) clean_hist[static_cast<size_t>(label)] += 1;
  for (const Provenance& p : corpus.labeled_prov) prov_hist[static_cast<size_t>(p.true_class)] += 1;
  for (const Provenance& p : corpus.unlabeled_prov) prov_hist[static_cast<size_t>(p.true_class)] += 1;
  CHECK(clean_hist == prov_hist);

  for (const Provenance& p : corpus.labeled_prov) CHECK(p.is_open_set == (p.true_class >= 8));
  for (const Provenance& p : corpus.unlabeled_prov) CHECK(p.is_open_set == (p.true_class >= 8));
}

TEST_CASE("empty labeled selection is a configuration error") {
  CleanDataset ds = generate_synthetic_mixture(4, 1, 2, Layout::ring, 29);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.0;
  cfg.closed_classes = 4;
  cfg.labeled_ratio = 0.05;  // rounds to zero of four samples
  cfg.usage_ratio = 0.0;
  cfg.seed = 30;
  CHECK_THROWS_AS(build_corpus(ds, cfg), ConfigError);
}

TEST_CASE("round_half_even behaves like banker's rounding") {
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(3.5) == 4);
  CHECK(round_half_even(2.4) == 2);
  CHECK(round_half_even(2.6) == 3);
  CHECK(round_half_even(0.0) == 0);
  CHECK(round_half_even(7.0) == 7);
}

TEST_CASE("corpus files round-trip exactly") {
  CleanDataset ds = generate_synthetic_mixture(6, 40, 3, Layout::grid, 31);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.3;
  cfg.closed_classes = 4;
  cfg.labeled_ratio = 0.4;
  cfg.usage_ratio = 0.7;
  cfg.seed = 32;
  Corpus corpus = build_corpus(ds, cfg);

  const std::string base = temp_base("roundtrip");
  save_corpus(corpus, base);
  Corpus loaded = load_corpus(base);
  CHECK(corpus_equal(corpus, loaded));
  CHECK(loaded.cfg.seed == cfg.seed);
  CHECK(loaded.cfg.noise_ratio == cfg.noise_ratio);

  SUBCASE("saving twice produces identical bytes") {
    const std::string again = temp_base("roundtrip2");
    save_corpus(corpus, again);
    for (const char* suffix : {".samples.jsonl", ".provenance.jsonl"}) {
      std::ifstream a(base + suffix), b(again + suffix);
      std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
      std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
      CHECK(sa == sb);
    }
  }
}

TEST_CASE("a truncated corpus file raises a parse error naming the spot") {
  CleanDataset ds = generate_synthetic_mixture(5, 20, 2, Layout::ring, 33);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.2;
  cfg.closed_classes = 4;
  cfg.labeled_ratio = 0.5;
  cfg.usage_ratio = 1.0;
  cfg.seed = 34;
  Corpus corpus = build_corpus(ds, cfg);
  const std::string base = temp_base("truncated");
  save_corpus(corpus, base);

  // Chop the sample file roughly in half.
  const std::string path = base + ".samples.jsonl";
  std::ifstream in(path);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body.substr(0, body.size() / 2);
  out.close();

  CHECK_THROWS_AS(load_corpus(base), ParseError);
}

TEST_CASE("an empty unlabeled list survives the round trip") {
  CleanDataset ds = generate_synthetic_mixture(4, 30, 2, Layout::ring, 35);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.0;
  cfg.closed_classes = 4;
  cfg.labeled_ratio = 1.0;
  cfg.usage_ratio = 0.0;
  cfg.seed = 36;
  Corpus corpus = build_corpus(ds, cfg);
  CHECK(corpus.unlabeled_x.rows == 0);
  const std::string base = temp_base("nounlabeled");
  save_corpus(corpus, base);
  Corpus loaded = load_corpus(base);
  CHECK(loaded.unlabeled_x.rows == 0);
  CHECK(corpus_equal(corpus, loaded));
}

TEST_CASE("labeled given labels are one-hot by construction") {
  CleanDataset ds = generate_synthetic_mixture(10, 50, 2, Layout::ring, 37);
  CorruptionConfig cfg;
  cfg.noise_ratio = 0.6;
  cfg.closed_classes = 8;
  cfg.labeled_ratio = 0.3;
  cfg.usage_ratio = 0.5;
  cfg.seed = 38;
  Corpus corpus = build_corpus(ds, cfg);
  for (int y : corpus.labeled_y) {
    CHECK(y >= 0);
    CHECK(y < corpus.K);
    Vec v = one_hot(corpus.K, y);
    double sum = 0.0;
    int ones = 0;
    for (double e : v) {
      sum += e;
      if (e == 1.0) ones += 1;
    }
    CHECK(sum == 1.0);
    CHECK(ones == 1);
  }
}

TEST_CASE("eval split draws from the closed-set mixture components") {
  CleanDataset ds = generate_synthetic_mixture(10, 10, 2, Layout::ring, 39);
  EvalSet eval = make_eval_split(ds, 8, 200, 40);
  CHECK(eval.x.rows == 1600);
  CHECK(eval.K == 8);
  for (int label : eval.labels) CHECK(label < 8);
  // Class means in the eval split sit near the mixture means.
  for (int k = 0; k < 8; ++k) {
    double mx = 0.0;
    int n = 0;
    for (int i = 0; i < eval.x.rows; ++i)
      if (eval.labels[static_cast<size_t>(i)] == k) {
        mx += eval.x.at(i, 0);
        n += 1;
      }
    CHECK(n == 200);
    CHECK(std::abs(mx / n - ds.mixture[static_cast<size_t>(k)].mean[0]) < 0.15);
  }

  const std::string path = temp_base("eval") + ".eval.jsonl";
  save_eval_set(eval, path);
  EvalSet loaded = load_eval_set(path);
  CHECK(loaded.x.data == eval.x.data);
  CHECK(loaded.labels == eval.labels);
}
