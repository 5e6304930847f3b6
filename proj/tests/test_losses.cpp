#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scgan/kernels.hpp"
#include "scgan/losses.hpp"
#include "scgan/trainer.hpp"

using namespace scgan;
using namespace scgan::losses;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d = 3;
  cfg.K = 4;
  cfg.d_z = 4;
  cfg.h_embed = 5;
  cfg.h_feat = 6;
  cfg.g_hidden = 7;
  cfg.d_hidden = 7;
  return cfg;
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal();
  return m;
}

Matrix random_simplex_rows(int rows, int k, Rng& rng) {
  Matrix m(rows, k);
  for (int i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      m.at(i, j) = -std::log(1.0 - rng.uniform());
      sum += m.at(i, j);
    }
    for (int j = 0; j < k; ++j) m.at(i, j) /= sum;
  }
  return m;
}

// Puts every D.* parameter at zero and sets the psi bias, making D constant.
void make_d_constant(ModelSet& m, double value) {
  for (Tensor& t : m.disc_params.tensors()) t.value.fill(0.0);
  m.disc_params.value("D.psi.b").at(0, 0) = value;
}

}  // namespace

TEST_CASE("hinge values and subgradient") {
  CHECK(hinge_d(-2.0) == 0.0);
  CHECK(hinge_d(0.0) == 1.0);
  CHECK(hinge_d(3.0) == 4.0);
  CHECK(hinge_d(-1.0) == 0.0);
  CHECK(hinge_d_slope(-1.0) == 0.0);  // kink uses the inactive side
  CHECK(hinge_d_slope(-0.999) == 1.0);
  CHECK(hinge_d_slope(-1.001) == 0.0);
}

TEST_CASE("gce at a perfect prediction is zero for any q") {
  Vec pred = {1.0, 0.0, 0.0};
  Vec label = {1.0, 0.0, 0.0};
  for (double q : {0.0, 0.3, 0.7, 1.0}) CHECK(gce(pred, label, q) == doctest::Approx(0.0));
}

TEST_CASE("gce q=1 is the mean absolute error form 1-p") {
  for (double p : {0.05, 0.3, 0.5, 0.77, 0.99}) CHECK(gce_from_p(p, 1.0) == 1.0 - p);
  CHECK(gce_from_p(0.5, 1.0) == 0.5);
}

TEST_CASE("gce q=0.7 at p=0.5 matches the frozen oracle value") {
  // (1 - 0.5^0.7) / 0.7, evaluated independently at high precision.
  const double expected = (1.0 - std::exp(0.7 * std::log(0.5))) / 0.7;
  CHECK(expected == doctest::Approx(0.549183).epsilon(1e-6));
  CHECK(gce_from_p(0.5, 0.7) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gce approaches the cross entropy as q goes to zero") {
  for (double p : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    CHECK(std::abs(gce_from_p(p, 1e-6) - (-std::log(p))) < 1e-5);
    CHECK(gce_from_p(p, 0.0) == doctest::Approx(-std::log(p)).epsilon(1e-12));
  }
}

TEST_CASE("gce is monotone decreasing in p for fixed q") {
  for (double q : {0.0, 0.4, 0.7, 1.0}) {
    double prev = gce_from_p(0.05, q);
    for (double p = 0.1; p <= 1.0; p += 0.05) {
      const double cur = gce_from_p(p, q);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("gce floors the probability in the q=0 branch") {
  CHECK(gce_from_p(0.0, 0.0) == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(gce_grad_p(0.0, 0.0)));
}

TEST_CASE("confidence is 0 at uniform and approaches 1 at one-hot") {
  CHECK(confidence(uniform_simplex(4)) == 0.0);
  CHECK(confidence(uniform_simplex(17)) == doctest::Approx(0.0).epsilon(1e-12));
  Vec nearly_one_hot = {1.0 - 3e-12, 1e-12, 1e-12, 1e-12};
  CHECK(confidence(nearly_one_hot) > 1.0 - 1e-9);
  CHECK(confidence(one_hot(5, 2)) == 1.0);
}

TEST_CASE("confidence of [0.7 0.1 0.1 0.1] matches the frozen entropy oracle") {
  // H = -(0.7 ln 0.7 + 3 * 0.1 ln 0.1) = 0.940448 nats; c = 1 - H / ln 4.
  const Vec pred = {0.7, 0.1, 0.1, 0.1};
  double entropy = 0.0;
  for (double p : pred) entropy -= p * std::log(p);
  CHECK(entropy == doctest::Approx(0.940448).epsilon(1e-6));
  const double expected = 1.0 - entropy / std::log(4.0);
  CHECK(expected == doctest::Approx(0.321614).epsilon(1e-5));
  CHECK(confidence(pred) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("confidence is permutation invariant and bounded") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix p = random_simplex_rows(1, 6, rng);
    Vec v = get_row(p, 0);
    const double c = confidence(v);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    Vec shuffled = v;
    rng.shuffle(shuffled);
    CHECK(confidence(shuffled) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("confidence decreases strictly along the line from one-hot to uniform") {
  const int k = 5;
  Vec peak = one_hot(k, 2);
  Vec uniform = uniform_simplex(k);
  double prev = 2.0;
  for (int t = 0; t <= 10; ++t) {
    const double alpha = t / 10.0;  // 0 = one-hot, 1 = uniform
    Vec mix(k);
    for (int j = 0; j < k; ++j)
      mix[static_cast<size_t>(j)] =
          (1.0 - alpha) * peak[static_cast<size_t>(j)] + alpha * uniform[static_cast<size_t>(j)];
    const double c = confidence(mix);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("correct_label averages and fixes points") {
  CHECK(correct_label(one_hot(4, 0), one_hot(4, 0)) == one_hot(4, 0));
  Vec corrected = correct_label(one_hot(4, 0), {0.5, 0.5, 0.0, 0.0});
  CHECK(corrected == Vec{0.75, 0.25, 0.0, 0.0});

  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix p = random_simplex_rows(2, 6, rng);
    Vec out = correct_label(get_row(p, 0), get_row(p, 1));
    double sum = 0.0;
    for (double v : out) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("assign_label is the identity and composes with confidence") {
  Vec pred = {0.6, 0.4};
  CHECK(assign_label(pred) == pred);
  CHECK(confidence(assign_label(pred)) == confidence(pred));
  // Never hardens to one-hot.
  Vec soft = {0.55, 0.25, 0.2};
  CHECK(assign_label(soft) == soft);
}

TEST_CASE("labeled adversarial loss vanishes when every weight is zero") {
  ModelSet m = ModelSet::create(tiny_config(), 3);
  // Fresh classifier is uniform, so every confidence is exactly zero.
  Rng rng(3);
  Matrix x = random_matrix(8, m.cfg.d, rng);
  std::vector<int> given;
  for (int i = 0; i < 8; ++i) given.push_back(rng.index(m.cfg.K));

  LossConfig cfg;
  m.disc_params.zero_grads();
  std::vector<InstanceTerms> terms;
  const double loss = d_loss_labeled(m, x, given, cfg, true, &terms);
  CHECK(loss == 0.0);
  for (const InstanceTerms& t : terms) {
    CHECK(t.confidence == 0.0);
    CHECK(t.weight == 0.0);
    CHECK(t.contribution == 0.0);
  }
  // Annihilation covers the gradient too.
  CHECK(m.disc_params.grad_sq_norm() == 0.0);

  // The unlabeled loss mirrors this at the uniform start.
  CHECK(d_loss_unlabeled(m, x, cfg, false) == 0.0);
}

TEST_CASE("single labeled sample with c=1 and D=-2 contributes hinge(2)=3") {
  ModelSet m = ModelSet::create(tiny_config(), 4);
  make_d_constant(m, -2.0);
  Rng rng(4);
  Matrix x = random_matrix(1, m.cfg.d, rng);

  std::vector<InstanceTerms> terms(1);
  terms[0].label = one_hot(m.cfg.K, 1);
  terms[0].weight = 1.0;
  const double loss = real_hinge_from_terms(m, x, terms, false);
  CHECK(loss == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(terms[0].score == doctest::Approx(-2.0));
  CHECK(terms[0].contribution == doctest::Approx(3.0));
}

TEST_CASE("unlabeled loss scales linearly in the instance weights") {
  ModelSet m = ModelSet::create(tiny_config(), 5);
  Rng wrng(55);
  for (Tensor& t : m.disc_params.tensors())
    for (double& v : t.value.data) v += 0.3 * wrng.normal();
  Rng rng(5);
  Matrix u = random_matrix(6, m.cfg.d, rng);

  LossConfig cfg;
  std::vector<InstanceTerms> terms;
  d_loss_unlabeled(m, u, cfg, false, &terms);

  std::vector<InstanceTerms> doubled = terms;
  for (InstanceTerms& t : doubled) t.weight *= 2.0;
  const double base = real_hinge_from_terms(m, u, terms, false);
  const double twice = real_hinge_from_terms(m, u, doubled, false);
  CHECK(twice == doctest::Approx(2.0 * base).epsilon(1e-12));

  // Hand-check a single instance against the definition.
  std::vector<InstanceTerms> solo(terms.begin(), terms.begin() + 1);
  Matrix u0(1, m.cfg.d);
  std::copy(u.row(0), u.row(0) + m.cfg.d, u0.row(0));
  const double expected = solo[0].weight * hinge_d(-m.d_score(u0, [&] {
    Matrix y(1, m.cfg.K);
    set_row(y, 0, solo[0].label);
    return y;
  }())[0]);
  CHECK(real_hinge_from_terms(m, u0, solo, false) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fake loss follows the hinge of a constant discriminator") {
  ModelSet m = ModelSet::create(tiny_config(), 6);
  Rng rng(6);
  Matrix z = random_matrix(5, m.cfg.d_z, rng);
  Matrix y(5, m.cfg.K);
  for (int i = 0; i < 5; ++i) y.at(i, i % m.cfg.K) = 1.0;

  make_d_constant(m, -2.0);
  CHECK(d_loss_fake(m, z, y, false) == 0.0);
  make_d_constant(m, 0.0);
  CHECK(d_loss_fake(m, z, y, false) == doctest::Approx(1.0));

  // The D step never updates the generator.
  m.gen_params.zero_grads();
  m.disc_params.zero_grads();
  d_loss_fake(m, z, y, true);
  CHECK(m.gen_params.grad_sq_norm() == 0.0);
}

TEST_CASE("classifier loss matches the mean of per-instance gce values") {
  ModelSet m = ModelSet::create(tiny_config(), 7);
  Rng wrng(77);
  for (double& v : m.disc_params.value("D.cls.W").data) v = wrng.normal();
  Rng rng(7);
  Matrix x = random_matrix(5, m.cfg.d, rng);
  std::vector<int> given;
  for (int i = 0; i < 5; ++i) given.push_back(rng.index(m.cfg.K));
  Matrix xf = random_matrix(4, m.cfg.d, rng);
  Matrix yf = random_simplex_rows(4, m.cfg.K, rng);
  const double q = 0.7;

  const double loss = cls_loss(m, x, given, xf, yf, q, false);

  Matrix px = m.classify(x);
  Matrix pf = m.classify(xf);
  double real_term = 0.0;
  for (int i = 0; i < 5; ++i)
    real_term += gce(get_row(px, i), one_hot(m.cfg.K, given[static_cast<size_t>(i)]), q);
  real_term /= 5.0;
  double fake_term = 0.0;
  for (int i = 0; i < 4; ++i) fake_term += gce(get_row(pf, i), get_row(yf, i), q);
  fake_term /= 4.0;
  CHECK(loss == doctest::Approx(real_term + fake_term).epsilon(1e-12));
}

TEST_CASE("an empty fake batch is a contract error") {
  ModelSet m = ModelSet::create(tiny_config(), 8);
  Rng rng(8);
  Matrix x = random_matrix(3, m.cfg.d, rng);
  std::vector<int> given = {0, 1, 2};
  Matrix empty(0, m.cfg.d);
  Matrix yf(0, m.cfg.K);
  CHECK_THROWS_AS(cls_loss(m, x, given, empty, yf, 0.7, false), ContractError);
}

TEST_CASE("a nearly perfect classifier drives the loss to zero") {
  ModelSet m = ModelSet::create(tiny_config(), 9);
  // Feed the head its own target: one labeled sample per class placed so the
  // trained-to-saturation head is unnecessary; instead force huge logits by
  // an explicit weight construction on the feature bias path.
  // Simpler: use the gce formula directly on a saturated prediction.
  Vec saturated(static_cast<size_t>(m.cfg.K), 1e-30);
  saturated[1] = 1.0 - 3e-30;
  CHECK(gce(saturated, one_hot(m.cfg.K, 1), 0.7) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("combine_d_loss is plain arithmetic") {
  CHECK(combine_d_loss(1.0, 2.0, 3.0, 4.0, 0.1) == doctest::Approx(6.4).epsilon(1e-15));
  CHECK(combine_d_loss(1.0, 2.0, 3.0, 4.0, 0.0) == 6.0);
}

TEST_CASE("total_d_loss equals the sum of independently evaluated parts") {
  ModelSet m = ModelSet::create(tiny_config(), 10);
  Rng wrng(10);
  for (Tensor& t : m.disc_params.tensors())
    for (double& v : t.value.data) v += 0.2 * wrng.normal();
  Rng rng(10);
  Matrix x = random_matrix(6, m.cfg.d, rng);
  std::vector<int> given;
  for (int i = 0; i < 6; ++i) given.push_back(rng.index(m.cfg.K));
  Matrix u = random_matrix(6, m.cfg.d, rng);
  Matrix z = random_matrix(6, m.cfg.d_z, rng);
  Matrix y(6, m.cfg.K);
  for (int i = 0; i < 6; ++i) y.at(i, i % m.cfg.K) = 1.0;

  LossConfig cfg;
  losses::DLossParts parts = total_d_loss(m, x, given, u, z, y, cfg, false);

  const double lbl = d_loss_labeled(m, x, given, cfg, false);
  const double unlbl = d_loss_unlabeled(m, u, cfg, false);
  const double fake = d_loss_fake(m, z, y, false);
  Matrix xf = m.generate(z, y);
  const double cls = cls_loss(m, x, given, xf, y, cfg.q_gce, false);
  CHECK(parts.lbl == lbl);
  CHECK(parts.unlbl == unlbl);
  CHECK(parts.fake == fake);
  CHECK(parts.cls == cls);
  CHECK(std::abs(parts.total - (lbl + unlbl + fake + cfg.lambda_cls * cls)) < 1e-12);

  SUBCASE("lambda zero reduces to the pure adversarial sum") {
    LossConfig no_cls = cfg;
    no_cls.lambda_cls = 0.0;
    losses::DLossParts p2 = total_d_loss(m, x, given, u, z, y, no_cls, false);
    CHECK(p2.total == doctest::Approx(p2.lbl + p2.unlbl + p2.fake).epsilon(1e-15));
  }
}

TEST_CASE("generator loss under a constant discriminator and its bookkeeping") {
  ModelSet m = ModelSet::create(tiny_config(), 11);
  make_d_constant(m, 5.0);
  Rng rng(11);
  Matrix z = random_matrix(4, m.cfg.d_z, rng);
  Matrix y(4, m.cfg.K);
  for (int i = 0; i < 4; ++i) y.at(i, 0) = 1.0;
  CHECK(g_loss(m, z, y, false) == doctest::Approx(-5.0));

  // The generator step must leave the discriminator's gradients untouched.
  ModelSet m2 = ModelSet::create(tiny_config(), 12);
  m2.disc_params.zero_grads();
  m2.gen_params.zero_grads();
  g_loss(m2, z, y, true);
  CHECK(m2.disc_params.grad_sq_norm() == 0.0);
  CHECK(m2.gen_params.grad_sq_norm() > 0.0);
}

TEST_CASE("supervised losses reduce to the weighted machinery with c=1") {
  ModelSet m = ModelSet::create(tiny_config(), 13);
  Rng wrng(13);
  for (Tensor& t : m.disc_params.tensors())
    for (double& v : t.value.data) v += 0.2 * wrng.normal();
  Rng rng(13);
  Matrix x = random_matrix(5, m.cfg.d, rng);
  std::vector<int> given;
  for (int i = 0; i < 5; ++i) given.push_back(rng.index(m.cfg.K));
  Matrix z = random_matrix(5, m.cfg.d_z, rng);
  Matrix y(5, m.cfg.K);
  for (int i = 0; i < 5; ++i) y.at(i, i % m.cfg.K) = 1.0;

  auto [d, g] = supervised_losses(m, x, given, z, y, false, false);

  // Hand evaluation of the two hinge expectations.
  Matrix y_given(5, m.cfg.K);
  for (int i = 0; i < 5; ++i) y_given.at(i, given[static_cast<size_t>(i)]) = 1.0;
  Vec s_real = m.d_score(x, y_given);
  Vec s_fake = m.d_score(m.generate(z, y), y);
  double expect_d = 0.0;
  for (int i = 0; i < 5; ++i)
    expect_d += hinge_d(-s_real[static_cast<size_t>(i)]) / 5.0 +
                hinge_d(s_fake[static_cast<size_t>(i)]) / 5.0;
  double expect_g = 0.0;
  for (double s : s_fake) expect_g -= s / 5.0;
  CHECK(d == doctest::Approx(expect_d).epsilon(1e-12));
  CHECK(g == doctest::Approx(expect_g).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Finite-difference checks for every loss. Instances near a hinge kink or a
// rectifier kink are resampled; the guard margin is 1e-3 on scores.
// ---------------------------------------------------------------------------

namespace {

bool near_hinge_kink(const Vec& scores, bool negated, double margin = 1e-3) {
  for (double s : scores) {
    const double arg = negated ? -s : s;
    if (std::abs(arg + 1.0) < margin) return true;
  }
  return false;
}

ModelSet randomized_models(uint64_t seed) {
  ModelSet m = ModelSet::create(tiny_config(), seed);
  Rng rng = Rng::stream(seed, "perturb");
  for (Tensor& t : m.disc_params.tensors())
    for (double& v : t.value.data) v += 0.2 * rng.normal();
  for (Tensor& t : m.gen_params.tensors())
    for (double& v : t.value.data) v += 0.2 * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("every batch loss passes central differences on random instances") {
  int done = 0;
  for (uint64_t seed = 100; done < 5 && seed < 160; ++seed) {
    ModelSet m = randomized_models(seed);
    Rng rng = Rng::stream(seed, "data");
    const int n = 4;
    Matrix x = random_matrix(n, m.cfg.d, rng);
    std::vector<int> given;
    for (int i = 0; i < n; ++i) given.push_back(rng.index(m.cfg.K));
    Matrix u = random_matrix(n, m.cfg.d, rng);
    Matrix z = random_matrix(n, m.cfg.d_z, rng);
    Matrix y(n, m.cfg.K);
    for (int i = 0; i < n; ++i) y.at(i, rng.index(m.cfg.K)) = 1.0;

    // Kink guard: resample the whole instance when any score is near a kink.
    Matrix y_corr(n, m.cfg.K);
    {
      LossConfig cfg;
      Matrix probs = m.classify(x);
      for (int i = 0; i < n; ++i)
        set_row(y_corr, i,
                correct_label(one_hot(m.cfg.K, given[static_cast<size_t>(i)]), get_row(probs, i)));
    }
    Matrix pu = m.classify(u);
    if (near_hinge_kink(m.d_score(x, y_corr), true) || near_hinge_kink(m.d_score(u, pu), true) ||
        near_hinge_kink(m.d_score(m.generate(z, y), y), false))
      continue;
    done += 1;

    LossConfig cfg;
    {
      // Classifier outputs are detached inside the adversarial terms, so the
      // differentiable surface holds the annotations fixed: freeze the terms
      // once and probe the weighted hinge.
      std::vector<InstanceTerms> terms;
      d_loss_labeled(m, x, given, cfg, false, &terms);
      auto loss = [&](bool backprop) {
        std::vector<InstanceTerms> frozen = terms;
        return real_hinge_from_terms(m, x, frozen, backprop);
      };
      GradCheckReport r = check_gradients(m.disc_params, loss);
      CAPTURE(seed);
      CHECK(r.pass);
    }
    {
      std::vector<InstanceTerms> terms;
      d_loss_unlabeled(m, u, cfg, false, &terms);
      auto loss = [&](bool backprop) {
        std::vector<InstanceTerms> frozen = terms;
        return real_hinge_from_terms(m, u, frozen, backprop);
      };
      GradCheckReport r = check_gradients(m.disc_params, loss);
      CHECK(r.pass);
    }
    {
      auto loss = [&](bool backprop) { return d_loss_fake(m, z, y, backprop); };
      GradCheckReport r = check_gradients(m.disc_params, loss);
      CHECK(r.pass);
    }
    {
      Matrix xf = m.generate(z, y);
      auto loss = [&](bool backprop) { return cls_loss(m, x, given, xf, y, 0.7, backprop); };
      GradCheckReport r = check_gradients(m.disc_params, loss);
      CHECK(r.pass);
    }
    {
      auto loss = [&](bool backprop) { return g_loss(m, z, y, backprop); };
      GradCheckReport r = check_gradients(m.gen_params, loss);
      CHECK(r.pass);
    }
  }
  CHECK(done == 5);
}

TEST_CASE("gce through a two-layer classifier passes finite differences at q=0.7") {
  ModelSet m = randomized_models(200);
  Rng rng(14);
  Matrix x = random_matrix(6, m.cfg.d, rng);
  std::vector<int> given;
  for (int i = 0; i < 6; ++i) given.push_back(rng.index(m.cfg.K));
  Matrix xf = random_matrix(3, m.cfg.d, rng);
  Matrix yf = random_simplex_rows(3, m.cfg.K, rng);

  auto loss = [&](bool backprop) { return cls_loss(m, x, given, xf, yf, 0.7, backprop); };
  GradCheckReport r = check_gradients(m.disc_params, loss);
  CHECK(r.pass);
  CHECK(r.worst_rel_err < 1e-4);
}
