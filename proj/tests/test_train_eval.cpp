#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "piano/core/rng.hpp"
#include "piano/sim/experiment.hpp"
#include "piano/train/cluster.hpp"
#include "piano/train/metrics.hpp"
#include "piano/train/probes.hpp"
#include "piano/train/train.hpp"

using namespace piano;

namespace {

FieldSeries make_series(int n_frames, int sp,
                        const std::function<double(int, int)>& f) {
  FieldSeries s;
  s.n_frames = n_frames;
  s.channels = 1;
  s.grid = make_grid_1d(sp, -M_PI, M_PI);
  s.dt_frame = 0.025;
  s.t0 = 0.025;
  s.values.resize(static_cast<std::size_t>(n_frames) * sp);
  for (int k = 0; k < n_frames; ++k)
    for (int j = 0; j < sp; ++j)
      s.values[static_cast<std::size_t>(k) * sp + j] = f(k, j);
  return s;
}

// Pair-counting oracles over all O(n^2) index pairs, independent of the
// contingency-table implementation under test.
struct PairCounts {
  double ss = 0, sd = 0, ds = 0, dd = 0;  // same/diff in a x same/diff in b
};

PairCounts count_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  PairCounts p;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++p.ss;
      else if (sa) ++p.sd;
      else if (sb) ++p.ds;
      else ++p.dd;
    }
  return p;
}

double oracle_ari(const std::vector<int>& a, const std::vector<int>& b) {
  auto p = count_pairs(a, b);
  double n2 = p.ss + p.sd + p.ds + p.dd;
  double expected = (p.ss + p.sd) * (p.ss + p.ds) / n2;
  double max_idx = 0.5 * ((p.ss + p.sd) + (p.ss + p.ds));
  return (p.ss - expected) / (max_idx - expected);
}

double oracle_fmi(const std::vector<int>& a, const std::vector<int>& b) {
  auto p = count_pairs(a, b);
  return p.ss / std::sqrt((p.ss + p.sd) * (p.ss + p.ds));
}

double oracle_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++cab[{a[i], b[i]}];
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (auto& [key, nij] : cab)
    mi += nij / n *
          std::log(nij * n / (ca[key.first] * cb[key.second]));
  for (auto& [k, v] : ca) ha -= v / n * std::log(v / n);
  for (auto& [k, v] : cb) hb -= v / n * std::log(v / n);
  return mi / (0.5 * (ha + hb));
}

std::vector<PdeSample> small_e1_samples(int count, int n_frames) {
  auto spec = sim::desk_spec(ExperimentId::E1);
  std::vector<PdeSample> out;
  for (int i = 0; i < count; ++i)
    out.push_back(sim::generate_sample(spec, i, n_frames, 0.025 * n_frames));
  return out;
}

}  // namespace

TEST_CASE("relative l2 error oracles") {
  std::vector<double> p = {1.0, 0.0}, r = {0.0, 1.0};
  CHECK(rel_l2_error(p.data(), r.data(), 2) == Catch::Approx(std::sqrt(2.0)));
  std::vector<double> q = {3.0, 4.0}, s = {3.0, 4.0};
  CHECK(rel_l2_error(q.data(), s.data(), 2) == 0.0);
  // |(1,1)-(3,4)| / |(3,4)| = sqrt(13)/5.
  std::vector<double> u = {1.0, 1.0};
  CHECK(rel_l2_error(u.data(), q.data(), 2) ==
        Catch::Approx(std::sqrt(13.0) / 5.0));
  std::vector<double> z = {0.0, 0.0};
  CHECK_THROWS_AS(rel_l2_error(p.data(), z.data(), 2), ConfigError);
}

TEST_CASE("l-infinity error oracles") {
  std::vector<double> r = {1.0, -4.0, 2.0};
  std::vector<double> p = {1.5, -3.5, 2.5};  // constant offset 0.5
  CHECK(linf_error(p.data(), r.data(), 3) == Catch::Approx(0.5 / 4.0));
  CHECK(linf_error(p.data(), r.data(), 3, false) == Catch::Approx(0.5));
  std::vector<double> z = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(linf_error(p.data(), z.data(), 3), ConfigError);
  CHECK(linf_error(p.data(), z.data(), 3, false) == Catch::Approx(3.5));
}

TEST_CASE("forecast evaluation splits train and future frame domains") {
  const int sp = 4, t_in = 4, n_train = 20, n_total = 24;
  auto ref = make_series(24, sp, [](int k, int j) { return 1.0 + j; });
  // pred frame k = (1 + 0.01 k) * ref frame k: rel l2 and rel linf both 0.01k.
  std::vector<double> pred(static_cast<std::size_t>(n_total - t_in) * sp);
  for (int k = t_in; k < n_total; ++k)
    for (int j = 0; j < sp; ++j)
      pred[static_cast<std::size_t>(k - t_in) * sp + j] =
          (1.0 + 0.01 * k) * (1.0 + j);
  auto rep = evaluate_forecast(pred, ref, t_in, n_train, n_total);
  REQUIRE(rep.l2_per_frame.size() == 20);
  for (int k = t_in; k < n_total; ++k) {
    CHECK(rep.l2_per_frame[k - t_in] == Catch::Approx(0.01 * k));
    CHECK(rep.linf_per_frame[k - t_in] == Catch::Approx(0.01 * k));
  }
  double train_mean = 0.0, future_mean = 0.0;
  for (int k = t_in; k < n_train; ++k) train_mean += 0.01 * k;
  for (int k = n_train; k < n_total; ++k) future_mean += 0.01 * k;
  CHECK(rep.l2_train == Catch::Approx(train_mean / (n_train - t_in)));
  CHECK(rep.l2_future == Catch::Approx(future_mean / (n_total - n_train)));
  CHECK(rep.linf_train == Catch::Approx(train_mean / (n_train - t_in)));

  CHECK_THROWS_AS(evaluate_forecast(pred, ref, t_in, t_in, n_total),
                  ConfigError);
  CHECK_THROWS_AS(evaluate_forecast(pred, ref, t_in, n_train, 25),
                  ConfigError);
  pred.pop_back();
  CHECK_THROWS_AS(evaluate_forecast(pred, ref, t_in, n_train, n_total),
                  ConfigError);
}

TEST_CASE("metric report averages per-trajectory means") {
  ForecastReport a, b;
  a.l2_train = 0.1;
  a.l2_future = 0.3;
  b.l2_train = 0.2;
  b.l2_future = 0.5;
  MetricReport m;
  m.add(a);
  m.add(b);
  m.finish();
  CHECK(m.n_trajectories == 2);
  CHECK(m.l2_train == Catch::Approx(0.15));
  CHECK(m.l2_future == Catch::Approx(0.4));
}

TEST_CASE("teacher-forced blocks tile the training window") {
  std::vector<PdeSample> samples(2);
  for (auto& s : samples)
    s.series = make_series(200, 8, [](int k, int j) { return k + j + 1.0; });
  Dataset ds(std::move(samples));
  DatasetView view(ds);
  OperatorConfig cfg;
  cfg.t_in = 20;
  cfg.t_out = 20;
  auto blocks = detail::make_blocks(view, cfg, 20);
  // Offsets 0,20,...,160: nine blocks per 200-frame sample.
  REQUIRE(blocks.size() == 18);
  CHECK(blocks[0].offset == 0);
  CHECK(blocks[8].offset == 160);
  CHECK(blocks[9].sample == 1);

  std::vector<PdeSample> tiny(1);
  tiny[0].series = make_series(30, 8, [](int k, int j) { return 1.0; });
  Dataset ds2(std::move(tiny));
  DatasetView view2(ds2);
  CHECK_THROWS_AS(detail::make_blocks(view2, cfg, 20), ConfigError);
}

TEST_CASE("block loss gradient matches finite differences") {
  Rng rng(40);
  const int B = 2;
  const std::size_t sz = 6;
  std::vector<double> pred(B * sz), tgt(B * sz), g;
  for (auto& v : pred) v = rng.normal();
  for (auto& v : tgt) v = rng.normal();
  double loss = detail::block_loss_grad(pred, tgt, B, sz, g);
  // Oracle: mean over samples of |p-t| / |t|.
  double ref = 0.0;
  for (int bi = 0; bi < B; ++bi) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
      double d = pred[bi * sz + i] - tgt[bi * sz + i];
      num += d * d;
      den += tgt[bi * sz + i] * tgt[bi * sz + i];
    }
    ref += std::sqrt(num / den);
  }
  CHECK(loss == Catch::Approx(ref / B).margin(1e-12));
  const double h = 1e-7;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    double keep = pred[j];
    std::vector<double> tmp;
    pred[j] = keep + h;
    double lp = detail::block_loss_grad(pred, tgt, B, sz, tmp);
    pred[j] = keep - h;
    double lm = detail::block_loss_grad(pred, tgt, B, sz, tmp);
    pred[j] = keep;
    CHECK(g[j] == Catch::Approx((lp - lm) / (2 * h)).margin(1e-6));
  }
  std::vector<double> zt(B * sz, 0.0);
  CHECK_THROWS_AS(detail::block_loss_grad(pred, zt, B, sz, g), ConfigError);
}

TEST_CASE("kmeans separates two gaussian blobs perfectly") {
  const int n = 60, d = 3;
  Rng rng(41);
  std::vector<double> X(static_cast<std::size_t>(n) * d);
  std::vector<int> truth(n);
  for (int i = 0; i < n; ++i) {
    truth[i] = i % 2;
    double base = truth[i] ? 10.0 : -10.0;
    for (int j = 0; j < d; ++j)
      X[static_cast<std::size_t>(i) * d + j] = base + rng.normal();
  }
  Rng krng(42);
  auto res = kmeans(X, n, d, 2, krng);
  CHECK(adjusted_rand_index(res.labels, truth) == Catch::Approx(1.0));
  CHECK(normalized_mutual_information(res.labels, truth) ==
        Catch::Approx(1.0));
  CHECK(fowlkes_mallows_index(res.labels, truth) == Catch::Approx(1.0));
  CHECK(silhouette_score(X, n, d, res.labels) > 0.9);
  CHECK_THROWS_AS(kmeans(X, n, d, 0, krng), ConfigError);
  CHECK_THROWS_AS(kmeans(X, n, d, n + 1, krng), ConfigError);
}

TEST_CASE("clustering indices match pair-counting oracles") {
  Rng rng(43);
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 40;
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.uniform_int(4));
      b[i] = static_cast<int>(rng.uniform_int(3));
    }
    CHECK(adjusted_rand_index(a, b) == Catch::Approx(oracle_ari(a, b)));
    CHECK(fowlkes_mallows_index(a, b) == Catch::Approx(oracle_fmi(a, b)));
    CHECK(normalized_mutual_information(a, b) ==
          Catch::Approx(oracle_nmi(a, b)));
  }
}

TEST_CASE("clustering indices handle degenerate labelings") {
  std::vector<int> ones(8, 0);
  std::vector<int> split = {0, 0, 0, 0, 1, 1, 1, 1};
  // One flat labeling against a real one carries no mutual information.
  CHECK(normalized_mutual_information(ones, split) == Catch::Approx(0.0));
  // Both flat: conventionally 1.
  CHECK(normalized_mutual_information(ones, ones) == Catch::Approx(1.0));
  CHECK(adjusted_rand_index(split, split) == Catch::Approx(1.0));
  // All pairs split in a, none joined in both: no true-positive pairs.
  std::vector<int> allsplit = {0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(fowlkes_mallows_index(allsplit, split) == 0.0);
}

TEST_CASE("silhouette matches a hand computation on four points") {
  // Two pairs on a line: {0, 1} and {10, 11}.
  std::vector<double> X = {0.0, 1.0, 10.0, 11.0};
  std::vector<int> labels = {0, 0, 1, 1};
  // For x=0: a=1, b=(10+11)/2=10.5, s=(10.5-1)/10.5.
  // For x=1: a=1, b=9.5, s=8.5/9.5; symmetric for the other pair.
  double expect = 0.5 * ((9.5 / 10.5) + (8.5 / 9.5));
  CHECK(silhouette_score(X, 4, 1, labels) == Catch::Approx(expect));
}

TEST_CASE("standardizer gives zero-mean unit-variance columns") {
  Rng rng(44);
  const int n = 50, d = 3;
  std::vector<double> X(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    X[static_cast<std::size_t>(i) * d + 0] = 5.0 + 2.0 * rng.normal();
    X[static_cast<std::size_t>(i) * d + 1] = -3.0 + 0.1 * rng.normal();
    X[static_cast<std::size_t>(i) * d + 2] = 7.0;  // constant column
  }
  Standardizer st;
  st.fit(X, n, d);
  auto Z = st.apply(X, n, d);
  for (int j = 0; j < 2; ++j) {
    double m = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) m += Z[static_cast<std::size_t>(i) * d + j];
    m /= n;
    for (int i = 0; i < n; ++i) {
      double t = Z[static_cast<std::size_t>(i) * d + j] - m;
      v += t * t;
    }
    CHECK(std::abs(m) < 1e-12);
    CHECK(v / n == Catch::Approx(1.0));
  }
  // The constant column is centered but not rescaled.
  for (int i = 0; i < n; ++i)
    CHECK(Z[static_cast<std::size_t>(i) * d + 2] == 0.0);
}

TEST_CASE("logistic probe classifies separable clusters") {
  Rng rng(45);
  const int n = 90, d = 2, k = 3;
  std::vector<double> X(static_cast<std::size_t>(n) * d);
  std::vector<int> y(n);
  const double cx[3] = {0.0, 6.0, 0.0}, cy[3] = {0.0, 0.0, 6.0};
  for (int i = 0; i < n; ++i) {
    y[i] = i % 3;
    X[static_cast<std::size_t>(i) * d + 0] = cx[y[i]] + 0.3 * rng.normal();
    X[static_cast<std::size_t>(i) * d + 1] = cy[y[i]] + 0.3 * rng.normal();
  }
  LogisticProbe probe;
  probe.fit(X, y, n, d, k);
  CHECK(probe.accuracy(X, y, n) == 1.0);

  // Appending an all-zero feature leaves every prediction unchanged.
  std::vector<double> X3(static_cast<std::size_t>(n) * 3, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      X3[static_cast<std::size_t>(i) * 3 + j] =
          X[static_cast<std::size_t>(i) * d + j];
  LogisticProbe probe3;
  probe3.fit(X3, y, n, 3, k);
  for (int i = 0; i < n; ++i)
    CHECK(probe3.predict(X3.data() + static_cast<std::size_t>(i) * 3) ==
          probe.predict(X.data() + static_cast<std::size_t>(i) * d));
}

TEST_CASE("cholesky solves a known SPD system and rejects indefinite ones") {
  // A = [[4,2],[2,3]], b = [8, 7] -> x = [1, 2] ... check: 4+4=8, 2+6=8? no.
  // Solve exactly: x = A^{-1} b with det = 8; pick b = A [1, 2] = [8, 8].
  std::vector<double> A = {4.0, 2.0, 2.0, 3.0};
  std::vector<double> b = {8.0, 8.0};
  auto x = detail::cholesky_solve(A, b, 2);
  CHECK(x[0] == Catch::Approx(1.0));
  CHECK(x[1] == Catch::Approx(2.0));
  std::vector<double> bad = {1.0, 2.0, 2.0, 1.0};  // eigenvalues 3, -1
  CHECK_THROWS_AS(detail::cholesky_solve(bad, b, 2), ConfigError);
}

TEST_CASE("ridge probe recovers a linear target") {
  Rng rng(46);
  const int n = 80, d = 2;
  std::vector<double> X(static_cast<std::size_t>(n) * d), y(n);
  for (int i = 0; i < n; ++i) {
    double x1 = rng.normal(), x2 = rng.normal();
    X[static_cast<std::size_t>(i) * d + 0] = x1;
    X[static_cast<std::size_t>(i) * d + 1] = x2;
    y[i] = 2.0 * x1 - 3.0 * x2 + 1.0;
  }
  RidgeProbe probe;
  probe.fit(X, y, n, d, 1e-10);
  CHECK(probe.w[0] == Catch::Approx(2.0));
  CHECK(probe.w[1] == Catch::Approx(-3.0));
  CHECK(probe.intercept == Catch::Approx(1.0));
  CHECK(probe.rel_error(X, y, n) < 1e-8);
  CHECK(probe.mae(X, y, n) < 1e-8);
  CHECK(probe.rmse(X, y, n) < 1e-8);
  std::vector<double> zy(n, 0.0);
  CHECK_THROWS_AS(probe.rel_error(X, zy, n), ConfigError);
}

TEST_CASE("pc1 scores recover the dominant factor of rank-one data") {
  Rng rng(47);
  const int n = 60, d = 5;
  std::vector<double> dir(d);
  for (auto& v : dir) v = rng.normal();
  std::vector<double> factor(n), X(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    factor[i] = rng.normal();
    for (int j = 0; j < d; ++j)
      X[static_cast<std::size_t>(i) * d + j] =
          factor[i] * dir[j] + 1e-4 * rng.normal();
  }
  auto scores = pc1_scores(X, n, d);
  CHECK(std::abs(pearson_correlation(scores, factor)) > 0.999);
  double sum = 0.0;
  for (double s : scores) sum += s;
  CHECK(std::abs(sum) < 1e-8 * n);
}

TEST_CASE("correlation oracles") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> y = {2.0, 4.0, 6.0, 8.0};
  CHECK(pearson_correlation(x, y) == Catch::Approx(1.0));
  std::vector<double> yn = {8.0, 6.0, 4.0, 2.0};
  CHECK(pearson_correlation(x, yn) == Catch::Approx(-1.0));
  std::vector<double> c = {5.0, 5.0, 5.0, 5.0};
  CHECK_THROWS_AS(pearson_correlation(x, c), ConfigError);
  CHECK_THROWS_AS(pearson_correlation(x, std::vector<double>{1.0}),
                  ConfigError);
  // Monotone nonlinear map: spearman 1, pearson below 1.
  std::vector<double> ym = {std::exp(1.0), std::exp(2.0), std::exp(3.0),
                            std::exp(4.0)};
  CHECK(spearman_correlation(x, ym) == Catch::Approx(1.0));
  CHECK(pearson_correlation(x, ym) < 1.0);
  // Ties share the average rank.
  auto r = fractional_ranks({3.0, 1.0, 3.0, 2.0});
  CHECK(r == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("operator training reduces the loss and is deterministic") {
  auto samples = small_e1_samples(4, 60);
  Dataset ds(std::move(samples));
  DatasetView view(ds);

  OperatorConfig cfg;
  cfg.dim = 1;
  cfg.t_in = 20;
  cfg.t_out = 20;
  cfg.width = 8;
  cfg.modes = 6;
  cfg.n_kernels = 1;
  cfg.d_h = 4;
  cfg.n_tiles = 2;
  cfg.attn_hidden = 8;
  TrainConfig tcfg;
  tcfg.epochs = 8;
  tcfg.batch = 4;
  tcfg.seed = 5;

  Rng r1 = Rng::derive(5, 0x0a11);
  FnoOperator<1> op(cfg, r1);
  auto trace = train_operator<1>(op, nullptr, nullptr, view, tcfg);
  REQUIRE(trace.size() == 8);
  CHECK(trace.back() < trace.front());

  Rng r2 = Rng::derive(5, 0x0a11);
  FnoOperator<1> op2(cfg, r2);
  auto trace2 = train_operator<1>(op2, nullptr, nullptr, view, tcfg);
  CHECK(trace == trace2);
  for (std::size_t i = 0; i < op.params().size(); ++i)
    CHECK(op.params()[i]->v == op2.params()[i]->v);

  // Conditioned training drives the attention path as well.
  auto cfg_k = cfg;
  cfg_k.n_kernels = 3;
  Rng r3 = Rng::derive(5, 0x0a11);
  FnoOperator<1> opk(cfg_k, r3);
  AttentionMlp attn(cfg_k, r3);
  std::vector<double> H(static_cast<std::size_t>(view.size()) *
                        cfg_k.attn_in());
  Rng hr(48);
  for (auto& v : H) v = hr.normal();
  auto trace_k = train_operator<1>(opk, &attn, &H, view, tcfg);
  CHECK(trace_k.back() < trace_k.front());

  CHECK_THROWS_AS(train_operator<1>(opk, &attn, nullptr, view, tcfg),
                  ConfigError);
  CHECK_THROWS_AS(train_operator<1>(opk, nullptr, nullptr, view, tcfg),
                  ConfigError);
}

TEST_CASE("joint training updates the encoder end to end") {
  auto samples = small_e1_samples(4, 60);
  Dataset ds(std::move(samples));
  DatasetView view(ds);

  auto ecfg = default_encoder_config(1);
  OperatorConfig cfg;
  cfg.dim = 1;
  cfg.t_in = 20;
  cfg.t_out = 20;
  cfg.width = 8;
  cfg.modes = 6;
  cfg.n_kernels = 2;
  cfg.d_h = ecfg.d_h;
  cfg.n_tiles = 2;
  cfg.attn_hidden = 8;
  TrainConfig tcfg;
  tcfg.epochs = 4;
  tcfg.seed = 6;

  Rng mr = Rng::derive(6, 0x0a11);
  EncoderNet<1> enc(ecfg, mr);
  AttentionMlp attn(cfg, mr);
  FnoOperator<1> op(cfg, mr);
  auto before = enc.params()[0]->v;
  auto trace = train_joint<1>(enc, attn, op, view, tcfg);
  REQUIRE(trace.size() == 4);
  CHECK(trace.back() < trace.front());
  CHECK(enc.params()[0]->v != before);

  auto H = embed_dataset<1>(enc, view);
  CHECK(H.size() == view.size() * 2 * static_cast<std::size_t>(ecfg.d_h));
}
