#include "scgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scgan/kernels.hpp"
#include "scgan/losses.hpp"

namespace scgan {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void warn(std::vector<std::string>* warnings, const std::string& msg) {
  if (warnings) warnings->push_back(msg);
}

}  // namespace

void sym_eigen(const Matrix& S, Vec& evals, Matrix& evecs) {
  if (S.rows != S.cols) throw ContractError("sym_eigen: matrix must be square");
  const int n = S.rows;
  Matrix a = S;
  evecs.resize(n, n);
  for (int i = 0; i < n; ++i) evecs.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-28) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = evecs.at(k, p), vkq = evecs.at(k, q);
          evecs.at(k, p) = c * vkp - s * vkq;
          evecs.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  evals.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) evals[static_cast<size_t>(i)] = a.at(i, i);
}

namespace {

void moments(const Matrix& X, Vec& mu, Matrix& cov) {
  kernels::mean_rows(X, mu);
  kernels::covariance(X, mu, cov);
}

// V diag(f(evals)) V^T
Matrix eigen_rebuild(const Matrix& evecs, const Vec& evals) {
  const int n = evecs.rows;
  Matrix scaled(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scaled.at(i, j) = evecs.at(i, j) * evals[static_cast<size_t>(j)];
  Matrix out;
  kernels::matmul_bt(scaled, evecs, out);
  return out;
}

Matrix sqrt_psd(const Matrix& S, std::vector<std::string>* warnings, const char* what) {
  Vec evals;
  Matrix evecs;
  sym_eigen(S, evals, evecs);
  for (double& ev : evals) {
    if (ev < 0.0) {
      if (ev < -1e-10) warn(warnings, std::string(what) + ": eigenvalue clamped at 0");
      ev = 0.0;
    }
    ev = std::sqrt(ev);
  }
  return eigen_rebuild(evecs, evals);
}

void ridge_if_degenerate(Matrix& cov, std::vector<std::string>* warnings, const char* side) {
  Vec evals;
  Matrix evecs;
  sym_eigen(cov, evals, evecs);
  double min_ev = evals.empty() ? 0.0 : *std::min_element(evals.begin(), evals.end());
  if (min_ev < 1e-10) {
    for (int i = 0; i < cov.rows; ++i) cov.at(i, i) += 1e-6;
    warn(warnings, std::string("covariance ridge 1e-6 applied to ") + side);
  }
}

}  // namespace

double frechet_distance(const Matrix& A, const Matrix& B, std::vector<std::string>* warnings) {
  if (A.cols != B.cols) throw ContractError("frechet_distance: dimension mismatch");
  const int d = A.cols;
  if (A.rows < d + 1 || B.rows < d + 1)
    throw ContractError("frechet_distance: need at least d+1 samples per side");

  Vec mu_a, mu_b;
  Matrix cov_a, cov_b;
  moments(A, mu_a, cov_a);
  moments(B, mu_b, cov_b);
  ridge_if_degenerate(cov_a, warnings, "first set");
  ridge_if_degenerate(cov_b, warnings, "second set");

  double mean_term = 0.0;
  for (int j = 0; j < d; ++j) {
    const double diff = mu_a[static_cast<size_t>(j)] - mu_b[static_cast<size_t>(j)];
    mean_term += diff * diff;
  }

  Matrix root_a = sqrt_psd(cov_a, warnings, "sqrt(cov_a)");
  Matrix tmp, prod;
  kernels::matmul(root_a, cov_b, tmp);
  kernels::matmul(tmp, root_a, prod);
  // Symmetrize before decomposing; rounding skews it slightly.
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double avg = 0.5 * (prod.at(i, j) + prod.at(j, i));
      prod.at(i, j) = avg;
      prod.at(j, i) = avg;
    }

  Vec evals;
  Matrix evecs;
  sym_eigen(prod, evals, evecs);
  double trace_sqrt = 0.0;
  for (double ev : evals) {
    if (ev < 0.0) {
      if (ev < -1e-10) warn(warnings, "product eigenvalue clamped at 0");
      ev = 0.0;
    }
    trace_sqrt += std::sqrt(ev);
  }

  double trace_term = 0.0;
  for (int i = 0; i < d; ++i) trace_term += cov_a.at(i, i) + cov_b.at(i, i);
  return std::max(0.0, mean_term + trace_term - 2.0 * trace_sqrt);
}

double intra_frechet(const Matrix& real_x, const std::vector<int>& real_y, const Matrix& gen_x,
                     const std::vector<int>& gen_y, int K, std::vector<std::string>* warnings) {
  if (real_x.rows != static_cast<int>(real_y.size()) || gen_x.rows != static_cast<int>(gen_y.size()))
    throw ContractError("intra_frechet: labels do not match the sets");
  const int d = real_x.cols;

  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < K; ++k) {
    std::vector<int> ri, gi;
    for (size_t i = 0; i < real_y.size(); ++i)
      if (real_y[i] == k) ri.push_back(static_cast<int>(i));
    for (size_t i = 0; i < gen_y.size(); ++i)
      if (gen_y[i] == k) gi.push_back(static_cast<int>(i));
    if (static_cast<int>(ri.size()) < d + 1 || static_cast<int>(gi.size()) < d + 1) {
      warn(warnings, "iFID: class " + std::to_string(k) + " skipped (too few samples)");
      continue;
    }
    Matrix R(static_cast<int>(ri.size()), d), G(static_cast<int>(gi.size()), d);
    for (size_t i = 0; i < ri.size(); ++i)
      std::copy(real_x.row(ri[i]), real_x.row(ri[i]) + d, R.row(static_cast<int>(i)));
    for (size_t i = 0; i < gi.size(); ++i)
      std::copy(gen_x.row(gi[i]), gen_x.row(gi[i]) + d, G.row(static_cast<int>(i)));
    sum += frechet_distance(R, G, warnings);
    used += 1;
  }
  if (used == 0) {
    warn(warnings, "iFID: every class skipped");
    return 0.0;
  }
  return sum / used;
}

KMeansResult kmeans(const Matrix& X, int k, int restarts, uint64_t seed, int max_iter) {
  if (X.rows == 0) throw ContractError("kmeans: empty input");
  if (k < 1) throw ContractError("kmeans: k must be positive");
  const int n = X.rows, d = X.cols;
  k = std::min(k, n);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, "kmeans.restart", static_cast<uint64_t>(r));

    // k-means++ seeding.
    Matrix centers(k, d);
    std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    int first = rng.index(n);
    std::copy(X.row(first), X.row(first) + d, centers.row(0));
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double dist = 0.0;
        const double* x = X.row(i);
        const double* ctr = centers.row(c - 1);
        for (int j = 0; j < d; ++j) {
          const double diff = x[j] - ctr[j];
          dist += diff * diff;
        }
        d2[static_cast<size_t>(i)] = std::min(d2[static_cast<size_t>(i)], dist);
        total += d2[static_cast<size_t>(i)];
      }
      int pick = 0;
      if (total > 0.0) {
        const double u = rng.uniform() * total;
        double acc = 0.0;
        pick = n - 1;
        for (int i = 0; i < n; ++i) {
          acc += d2[static_cast<size_t>(i)];
          if (u < acc) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.index(n);
      }
      std::copy(X.row(pick), X.row(pick) + d, centers.row(c));
    }

    std::vector<int> assign(static_cast<size_t>(n), -1);
    Matrix dists;
    for (int iter = 0; iter < max_iter; ++iter) {
      kernels::pairwise_sq_dists(X, centers, dists);
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        const double* row = dists.row(i);
        for (int c = 1; c < k; ++c)
          if (row[c] < row[arg]) arg = c;
        if (assign[static_cast<size_t>(i)] != arg) {
          assign[static_cast<size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed) break;

      centers.fill(0.0);
      std::vector<int> counts(static_cast<size_t>(k), 0);
      for (int i = 0; i < n; ++i) {
        const int c = assign[static_cast<size_t>(i)];
        counts[static_cast<size_t>(c)] += 1;
        const double* x = X.row(i);
        double* ctr = centers.row(c);
        for (int j = 0; j < d; ++j) ctr[j] += x[j];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<size_t>(c)] > 0) {
          double* ctr = centers.row(c);
          for (int j = 0; j < d; ++j) ctr[j] /= counts[static_cast<size_t>(c)];
        } else {
          // Reseed an empty cluster at the point farthest from its center.
          int far = 0;
          double far_d = -1.0;
          for (int i = 0; i < n; ++i) {
            const double* row = dists.row(i);
            const double di = row[assign[static_cast<size_t>(i)]];
            if (di > far_d) {
              far_d = di;
              far = i;
            }
          }
          std::copy(X.row(far), X.row(far) + d, centers.row(c));
        }
      }
    }

    kernels::pairwise_sq_dists(X, centers, dists);
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) inertia += dists.at(i, assign[static_cast<size_t>(i)]);

    if (inertia < best.inertia) {
      best.centers = centers;
      best.assign = assign;
      best.inertia = inertia;
    }
  }
  return best;
}

PrdScores prd_from_histograms(const Vec& ref_hist, const Vec& eval_hist, int num_angles) {
  if (ref_hist.size() != eval_hist.size())
    throw ContractError("prd_from_histograms: histogram sizes differ");
  if (num_angles < 2) throw ContractError("prd_from_histograms: need at least two angles");

  auto f_beta = [](double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double den = b2 * precision + recall;
    if (den <= 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / den;
  };

  constexpr double kEps = 1e-10;
  PrdScores scores;
  for (int a = 0; a < num_angles; ++a) {
    const double angle = kEps + (kPi / 2.0 - 2.0 * kEps) * a / (num_angles - 1);
    const double lambda = std::tan(angle);
    double precision = 0.0, recall = 0.0;
    for (size_t i = 0; i < ref_hist.size(); ++i) {
      precision += std::min(lambda * ref_hist[i], eval_hist[i]);
      recall += std::min(ref_hist[i], eval_hist[i] / lambda);
    }
    precision = std::min(1.0, std::max(0.0, precision));
    recall = std::min(1.0, std::max(0.0, recall));
    scores.f8 = std::max(scores.f8, f_beta(precision, recall, 8.0));
    scores.f_eighth = std::max(scores.f_eighth, f_beta(precision, recall, 1.0 / 8.0));
  }
  return scores;
}

PrdScores prd_f_scores(const Matrix& real_f, const Matrix& gen_f, int num_clusters, int num_angles,
                       uint64_t seed) {
  if (real_f.rows == 0 || gen_f.rows == 0) throw ContractError("prd_f_scores: empty feature set");
  if (real_f.cols != gen_f.cols) throw ContractError("prd_f_scores: dimension mismatch");

  Matrix joint(real_f.rows + gen_f.rows, real_f.cols);
  std::copy(real_f.data.begin(), real_f.data.end(), joint.data.begin());
  std::copy(gen_f.data.begin(), gen_f.data.end(), joint.data.begin() + real_f.data.size());

  KMeansResult km = kmeans(joint, num_clusters, /*restarts=*/10, seed);
  const int k = km.centers.rows;
  Vec ref(static_cast<size_t>(k), 0.0), eval(static_cast<size_t>(k), 0.0);
  for (int i = 0; i < real_f.rows; ++i) ref[static_cast<size_t>(km.assign[static_cast<size_t>(i)])] += 1.0;
  for (int i = 0; i < gen_f.rows; ++i)
    eval[static_cast<size_t>(km.assign[static_cast<size_t>(real_f.rows + i)])] += 1.0;
  for (double& v : ref) v /= real_f.rows;
  for (double& v : eval) v /= gen_f.rows;

  return prd_from_histograms(ref, eval, num_angles);
}

double is_analogue(const Matrix& probs) {
  if (probs.rows == 0) throw ContractError("is_analogue: empty probability matrix");
  Vec marginal;
  kernels::mean_rows(probs, marginal);
  double mean_kl = 0.0;
  for (int i = 0; i < probs.rows; ++i) {
    const double* p = probs.row(i);
    double kl = 0.0;
    for (int j = 0; j < probs.cols; ++j)
      if (p[j] > 0.0) kl += p[j] * std::log(p[j] / marginal[static_cast<size_t>(j)]);
    mean_kl += kl;
  }
  mean_kl /= probs.rows;
  const double value = std::exp(mean_kl);
  return std::min(static_cast<double>(probs.cols), std::max(1.0, value));
}

double roc_auc(const Vec& positives, const Vec& negatives) {
  if (positives.empty() || negatives.empty()) return 0.5;

  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> all;
  all.reserve(positives.size() + negatives.size());
  for (double s : positives) all.push_back({s, true});
  for (double s : negatives) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Midranks over ties.
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < all.size()) {
    size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t t = i; t < j; ++t)
      if (all[t].positive) rank_sum_pos += midrank;
    i = j;
  }
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double Oracle::accuracy(const Matrix& X, const std::vector<int>& labels) const {
  Matrix p = probs(X);
  int hits = 0;
  for (int i = 0; i < p.rows; ++i)
    if (argmax(get_row(p, i)) == labels[static_cast<size_t>(i)]) ++hits;
  return p.rows > 0 ? static_cast<double>(hits) / p.rows : 0.0;
}

Oracle train_oracle(const EvalSet& eval, const ModelConfig& arch, uint64_t seed, int steps,
                    int batch_size, double lr) {
  Oracle oracle;
  oracle.cfg = arch;
  oracle.cfg.d = eval.d;
  oracle.cfg.K = eval.K;
  Rng init_rng = Rng::stream(seed, "oracle.init");
  oracle.backbone.init(oracle.params, oracle.cfg, init_rng);
  oracle.head.init(oracle.params, oracle.cfg, init_rng);

  Rng draw = Rng::stream(seed, "oracle.draws");
  const int n = eval.x.rows;
  AdamConfig adam{lr, 0.9, 0.999, 1e-8};
  for (int step = 0; step < steps; ++step) {
    const int bs = std::min(batch_size, n);
    Matrix xb(bs, eval.d);
    Matrix yb(bs, eval.K);
    for (int i = 0; i < bs; ++i) {
      const int src = draw.index(n);
      std::copy(eval.x.row(src), eval.x.row(src) + eval.d, xb.row(i));
      yb.at(i, eval.labels[static_cast<size_t>(src)]) = 1.0;
    }

    oracle.params.zero_grads();
    Mlp::Cache cache;
    Matrix feat = oracle.backbone.forward(oracle.params, xb, &cache);
    Matrix probs;
    kernels::softmax_rows(oracle.head.logits(oracle.params, feat), probs);
    Vec p;
    kernels::row_dots(probs, yb, p);
    Matrix dProbs(bs, eval.K);
    for (int i = 0; i < bs; ++i) {
      const double g = losses::gce_grad_p(p[static_cast<size_t>(i)], 0.0) / bs;
      const double* l = yb.row(i);
      double* dp = dProbs.row(i);
      for (int j = 0; j < eval.K; ++j) dp[j] = g * l[j];
    }
    Matrix dLogits;
    softmax_backward(probs, dProbs, dLogits);
    Matrix dFeat = oracle.head.backward(oracle.params, feat, dLogits, true);
    oracle.backbone.backward(oracle.params, cache, dFeat, true);
    adam_step(oracle.params, adam);
  }
  return oracle;
}

Diagnostics curriculum_diagnostics(const ModelSet& models, const Corpus& corpus) {
  Diagnostics diag;

  Matrix lbl_probs = corpus.labeled_x.rows > 0 ? models.classify(corpus.labeled_x) : Matrix();
  Matrix unlbl_probs = corpus.unlabeled_x.rows > 0 ? models.classify(corpus.unlabeled_x) : Matrix();

  long closed = 0, closed_hits = 0;
  auto tally = [&](const Matrix& probs, const std::vector<Provenance>& prov) {
    for (int i = 0; i < probs.rows; ++i) {
      const Provenance& p = prov[static_cast<size_t>(i)];
      if (p.is_open_set) continue;
      closed += 1;
      if (argmax(get_row(probs, i)) == p.true_class) closed_hits += 1;
    }
  };
  tally(lbl_probs, corpus.labeled_prov);
  tally(unlbl_probs, corpus.unlabeled_prov);
  diag.cls_accuracy = closed > 0 ? static_cast<double>(closed_hits) / closed : 0.0;

  // Correction succeeds when the classifier term of (y + yhat)/2 puts its
  // mass on the true class. Vacuously perfect when nothing was flipped.
  long flipped = 0, corrected = 0;
  for (int i = 0; i < lbl_probs.rows; ++i) {
    const Provenance& p = corpus.labeled_prov[static_cast<size_t>(i)];
    if (!p.was_flipped) continue;
    flipped += 1;
    if (argmax(get_row(lbl_probs, i)) == p.true_class) corrected += 1;
  }
  diag.correction_accuracy = flipped > 0 ? static_cast<double>(corrected) / flipped : 1.0;

  Vec closed_conf, open_conf;
  for (int i = 0; i < unlbl_probs.rows; ++i) {
    const double c = losses::confidence(get_row(unlbl_probs, i));
    if (corpus.unlabeled_prov[static_cast<size_t>(i)].is_open_set) {
      open_conf.push_back(c);
    } else {
      closed_conf.push_back(c);
    }
  }
  diag.confidence_auc = roc_auc(closed_conf, open_conf);
  return diag;
}

}  // namespace scgan
