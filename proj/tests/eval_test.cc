#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "omnipred/eval.h"
#include "omnipred/losses.h"
#include "omnipred/rng.h"
#include "omnipred/simplex_net.h"

using namespace omnipred;

namespace {

std::vector<double> UnitBall(std::size_t d, Rng& rng) {
  std::vector<double> x(d);
  double n = 0.0;
  for (double& v : x) {
    v = rng.Normal();
    n += v * v;
  }
  double r = std::pow(rng.Uniform(), 1.0 / d) / std::sqrt(n);
  for (double& v : x) v *= r;
  return x;
}

double NaiveThresh(std::span<const double> p, std::span<const int> y,
                   std::span<const double> grid) {
  double best = -1e300;
  for (double s : grid) {
    double v = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) v += (p[t] - y[t]) * Sign(p[t] - s);
    best = std::max(best, v / p.size());
  }
  return best;
}

struct MultiTrace {
  std::vector<std::size_t> idx, labels;
  std::vector<Example> data;
  Eigen::MatrixXd preds;
};

MultiTrace RandomTrace(const SimplexNet& net, std::size_t T, std::size_t d,
                       Rng& rng) {
  MultiTrace tr;
  tr.preds.resize(T, net.k());
  for (std::size_t t = 0; t < T; ++t) {
    tr.idx.push_back(rng.UniformIndex(net.size()));
    tr.labels.push_back(rng.UniformIndex(net.k()));
    tr.data.push_back({UnitBall(d, rng), tr.labels.back()});
    auto s = net.point(tr.idx.back());
    for (std::size_t i = 0; i < net.k(); ++i) tr.preds(t, i) = s[i];
  }
  return tr;
}

// (1/T) sum_t <u_{p_t}, p_t - e_{y_t}> for a given u in [-1,1]^{N x k}.
double BoxPayoff(const SimplexNet& net, const MultiTrace& tr,
                 const std::vector<double>& u) {
  double v = 0.0;
  for (std::size_t t = 0; t < tr.idx.size(); ++t) {
    auto s = net.point(tr.idx[t]);
    for (std::size_t i = 0; i < net.k(); ++i) {
      double r = s[i] - (tr.labels[t] == i ? 1.0 : 0.0);
      v += u[tr.idx[t] * net.k() + i] * r;
    }
  }
  return v / tr.idx.size();
}

}  // namespace

TEST_CASE("threshold calibration examples") {
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  SUBCASE("matched predictions") {
    std::vector<double> p = {0.0, 1.0, 1.0};
    std::vector<int> y = {0, 1, 1};
    CHECK(ThreshCalibration(p, y, grid).one_sided == 0.0);
  }
  SUBCASE("half labels at one half") {
    std::vector<double> p = {0.5, 0.5, 0.5, 0.5};
    std::vector<int> y = {0, 1, 0, 1};
    auto c = ThreshCalibration(p, y, grid);
    CHECK(c.one_sided == 0.0);
    CHECK(c.absolute == 0.0);
  }
  SUBCASE("two rounds at 0.75") {
    std::vector<double> p = {0.75, 0.75};
    std::vector<int> y = {1, 0};
    CHECK(ThreshCalibration(p, y, grid).one_sided == doctest::Approx(0.25));
  }
}

TEST_CASE("threshold calibration matches a direct scan") {
  Rng rng(1);
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t T = 1 + rng.UniformIndex(40);
    std::vector<double> p(T);
    std::vector<int> y(T);
    for (std::size_t t = 0; t < T; ++t) {
      p[t] = grid[rng.UniformIndex(grid.size())];
      y[t] = rng.Uniform() < 0.5;
    }
    auto c = ThreshCalibration(p, y, grid);
    CHECK(c.one_sided == doctest::Approx(NaiveThresh(p, y, grid)).epsilon(1e-12));
    CHECK(c.one_sided >= -1e-12);
    CHECK(c.absolute >= c.one_sided - 1e-15);
  }
}

TEST_CASE("linf calibration examples") {
  SimplexNet net = BuildSimplexNet(3, 1.0);  // n = 4
  std::vector<int> half = {2, 2, 0};
  std::size_t s = *net.IndexOf(half);
  std::vector<std::size_t> preds = {s}, labels = {0};
  CHECK(LinfCalibration(net, preds, labels) == doctest::Approx(1.0));
  // Bucket means equal the bucket point.
  std::vector<std::size_t> p2 = {s, s}, y2 = {0, 1};
  CHECK(LinfCalibration(net, p2, y2) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("linf calibration equals the corner maximum and dominates samples") {
  SimplexNet net = BuildSimplexNet(2, 0.5);  // 5 points, |N| k = 10
  REQUIRE(net.size() * net.k() <= 12);
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    MultiTrace tr = RandomTrace(net, 1 + rng.UniformIndex(15), 1, rng);
    double closed = LinfCalibration(net, tr.idx, tr.labels);
    const std::size_t dim = net.size() * net.k();
    double corner = -1e300;
    std::vector<double> u(dim);
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
      for (std::size_t j = 0; j < dim; ++j) u[j] = (mask >> j) & 1 ? 1.0 : -1.0;
      corner = std::max(corner, BoxPayoff(net, tr, u));
    }
    CHECK(closed == doctest::Approx(corner).epsilon(1e-12));
    for (int i = 0; i < 1000; ++i) {
      for (double& v : u) v = 2.0 * rng.Uniform() - 1.0;
      CHECK(BoxPayoff(net, tr, u) <= closed + 1e-12);
    }
  }
}

TEST_CASE("linear multiaccuracy examples and random lower bounds") {
  SUBCASE("exact predictions") {
    Eigen::MatrixXd p(2, 2);
    p << 1, 0, 0, 1;
    std::vector<std::size_t> y = {0, 1};
    std::vector<Example> d = {{{0.3}, 0}, {{-0.2}, 1}};
    CHECK(LinearMultiaccuracy(p, y, d) == 0.0);
  }
  SUBCASE("errors cancel") {
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    std::vector<std::size_t> y = {0, 1};
    std::vector<Example> d = {{{0.7}, 0}, {{0.7}, 1}};
    CHECK(LinearMultiaccuracy(p, y, d) == doctest::Approx(0.0));
  }
  SUBCASE("single round") {
    Eigen::MatrixXd p(1, 2);
    p << 0.5, 0.5;
    std::vector<std::size_t> y = {1};
    std::vector<Example> d = {{{1.0}, 1}};
    CHECK(LinearMultiaccuracy(p, y, d) == doctest::Approx(1.0));
  }
  SUBCASE("random row-ball matrices never exceed the closed form") {
    Rng rng(8);
    SimplexNet net = BuildSimplexNet(3, 0.5);
    MultiTrace tr = RandomTrace(net, 30, 4, rng);
    double closed = LinearMultiaccuracy(tr.preds, tr.labels, tr.data);
    for (int i = 0; i < 1000; ++i) {
      Eigen::MatrixXd c(3, 4);
      for (Eigen::Index a = 0; a < 3; ++a) {
        auto row = UnitBall(4, rng);
        for (Eigen::Index b = 0; b < 4; ++b) c(a, b) = row[b];
      }
      double v = 0.0;
      for (std::size_t t = 0; t < 30; ++t) {
        Eigen::VectorXd r = tr.preds.row(t).transpose();
        r[tr.labels[t]] -= 1.0;
        Eigen::Map<const Eigen::VectorXd> x(tr.data[t].x.data(), 4);
        v += r.dot(c * x);
      }
      CHECK(v / 30 <= closed + 1e-12);
    }
  }
}

TEST_CASE("metrics are invariant under round permutations") {
  Rng rng(12);
  SimplexNet net = BuildSimplexNet(3, 0.5);
  MultiTrace tr = RandomTrace(net, 40, 3, rng);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  MultiTrace sh = tr;
  for (std::size_t t = 0; t < 40; ++t) {
    sh.idx[t] = tr.idx[perm[t]];
    sh.labels[t] = tr.labels[perm[t]];
    sh.data[t] = tr.data[perm[t]];
    sh.preds.row(t) = tr.preds.row(perm[t]);
  }
  CHECK(LinfCalibration(net, sh.idx, sh.labels) ==
        doctest::Approx(LinfCalibration(net, tr.idx, tr.labels)));
  CHECK(LinearMultiaccuracy(sh.preds, sh.labels, sh.data) ==
        doctest::Approx(LinearMultiaccuracy(tr.preds, tr.labels, tr.data)));

  std::vector<double> grid = BinaryGridValues(BuildSimplexNet(2, 0.2));
  std::vector<double> p(40), ps(40);
  std::vector<int> y(40), ys(40);
  for (std::size_t t = 0; t < 40; ++t) {
    p[t] = grid[rng.UniformIndex(grid.size())];
    y[t] = rng.Uniform() < 0.4;
  }
  for (std::size_t t = 0; t < 40; ++t) {
    ps[t] = p[perm[t]];
    ys[t] = y[perm[t]];
  }
  CHECK(ThreshCalibration(ps, ys, grid).one_sided ==
        doctest::Approx(ThreshCalibration(p, y, grid).one_sided));
}

TEST_CASE("linf calibration moves by at most 2/T when one label changes") {
  Rng rng(21);
  SimplexNet net = BuildSimplexNet(4, 0.5);
  for (int rep = 0; rep < 200; ++rep) {
    MultiTrace tr = RandomTrace(net, 25, 1, rng);
    double before = LinfCalibration(net, tr.idx, tr.labels);
    tr.labels[rng.UniformIndex(25)] = rng.UniformIndex(4);
    double after = LinfCalibration(net, tr.idx, tr.labels);
    CHECK(std::abs(after - before) <= 2.0 / 25 + 1e-12);
  }
}

TEST_CASE("omni gap against the zero comparator is a difference of means") {
  auto loss = MakeBrierGlm(3);
  Eigen::MatrixXd preds(2, 3);
  preds << 0.5, 0.5, 0.0, 0.2, 0.2, 0.6;
  std::vector<std::size_t> y = {0, 2};
  std::vector<Example> d = {{{0.1, 0.2}, 0}, {{0.0, -0.5}, 2}};
  LinearComparator zero{Eigen::MatrixXd::Zero(3, 2), FeatureMap::kIdentity,
                        "zero"};
  std::vector<LinearComparator> bench = {zero};
  GapReport g = OmniGap(*loss, preds, y, d, bench);
  std::vector<double> t0 = {0, 0, 0};
  double zero_loss = loss->Value(t0, 0) / 2 + loss->Value(t0, 2) / 2;
  std::vector<double> p0 = {0.5, 0.5, 0.0}, p1 = {0.2, 0.2, 0.6};
  double pred_loss = (loss->Value(p0, 0) + loss->Value(p1, 2)) / 2;
  CHECK(g.gap == doctest::Approx(pred_loss - zero_loss));
  CHECK(g.best_comparator == "zero");
}

TEST_CASE("predicting the label vertex is never beaten") {
  Rng rng(3);
  for (std::size_t k : {2, 3, 4}) {
    std::size_t T = 20;
    Eigen::MatrixXd preds = Eigen::MatrixXd::Zero(T, k);
    std::vector<std::size_t> y(T);
    std::vector<Example> d(T);
    for (std::size_t t = 0; t < T; ++t) {
      y[t] = rng.UniformIndex(k);
      preds(t, y[t]) = 1.0;
      d[t] = {UnitBall(3, rng), y[t]};
    }
    std::vector<LinearComparator> bench;
    for (int j = 0; j < 5; ++j) {
      Eigen::MatrixXd c = Eigen::MatrixXd::Random(k, 3);
      ProjectRows(c);
      bench.push_back({c, FeatureMap::kIdentity, "rand"});
    }
    for (const auto& loss : MulticlassLossBank(k)) {
      CHECK(OmniGap(*loss, preds, y, d, bench).gap <= 1e-12);
    }
  }
}

TEST_CASE("gap never exceeds the traced recipe terms") {
  Rng rng(77);
  for (std::size_t k : {2, 3}) {
    SimplexNet net = BuildSimplexNet(k, 0.5);
    for (int rep = 0; rep < 20; ++rep) {
      MultiTrace tr = RandomTrace(net, 50, 3, rng);
      std::vector<LinearComparator> bench;
      for (int j = 0; j < 4; ++j) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Random(k, 3);
        ProjectRows(c);
        bench.push_back({c, j % 2 ? FeatureMap::kSquare : FeatureMap::kIdentity,
                         "rand"});
      }
      for (const auto& loss : MulticlassLossBank(k)) {
        GapReport g = OmniGap(*loss, tr.preds, tr.labels, tr.data, bench);
        CHECK(g.gap <= g.recipe_ma + g.recipe_cal_w + 1e-9);
        CHECK(g.recipe_ma <= g.ma_sup + 1e-12);
      }
    }
  }
  // Binary, over the whole bank.
  std::vector<double> grid = BinaryGridValues(BuildSimplexNet(2, 0.1));
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t T = 60;
    std::vector<double> p(T);
    std::vector<int> y(T);
    std::vector<Example> d(T);
    for (std::size_t t = 0; t < T; ++t) {
      p[t] = grid[rng.UniformIndex(grid.size())];
      y[t] = rng.Uniform() < p[t];
      d[t] = {UnitBall(2, rng), std::size_t(y[t])};
    }
    std::vector<LinearComparator> bench;
    for (int j = 0; j < 4; ++j) {
      Eigen::MatrixXd c = Eigen::MatrixXd::Random(1, 2);
      ProjectRows(c);
      bench.push_back({c, FeatureMap::kIdentity, "rand"});
    }
    ThreshCal tc = ThreshCalibration(p, y, grid);
    for (const auto& loss : BinaryLossBank()) {
      GapReport g = BinaryOmniGap(*loss, p, y, d, bench);
      CHECK(g.gap <= g.recipe_ma + g.recipe_cal_w + 1e-9);
      CHECK(g.recipe_ma <= g.ma_sup + 1e-12);
      // k* is nondecreasing with range in [-1, 1].
      CHECK(g.recipe_cal_w <= 4.0 * tc.absolute + 1e-9);
    }
  }
}

TEST_CASE("ERM beats the zero comparator and approaches the truth") {
  Rng rng(4);
  std::vector<double> cstar = {0.6, -0.5, 0.3};
  std::vector<Example> data(3000);
  for (auto& e : data) {
    e.x = UnitBall(3, rng);
    double z = 0.0;
    for (int i = 0; i < 3; ++i) z += cstar[i] * e.x[i];
    e.label = rng.Uniform() < 1.0 / (1.0 + std::exp(-z));
  }
  auto loss = MakeLogBinary();
  LinearComparator erm = FitErmBinary(*loss, data, FeatureMap::kIdentity);
  Eigen::MatrixXd truth(1, 3);
  truth << 0.6, -0.5, 0.3;
  auto avg = [&](const LinearComparator& c) {
    double v = 0.0;
    for (const auto& e : data) v += loss->Value(c.Apply(e.x)[0], e.label);
    return v / data.size();
  };
  LinearComparator zero{Eigen::MatrixXd::Zero(1, 3), FeatureMap::kIdentity, "z"};
  LinearComparator tc{truth, FeatureMap::kIdentity, "truth"};
  CHECK(avg(erm) <= avg(zero) + 1e-12);
  CHECK(avg(erm) <= avg(tc) + 1e-3);
  CHECK(erm.c.row(0).norm() <= 1.0 + 1e-12);

  auto ce = MakeCrossEntropy(3);
  std::vector<Example> mdata(1000);
  for (auto& e : mdata) {
    e.x = UnitBall(2, rng);
    e.label = e.x[0] > 0 ? 0 : (e.x[1] > 0 ? 1 : 2);
  }
  LinearComparator merm = FitErm(*ce, mdata, FeatureMap::kIdentity);
  double zl = 0.0, el = 0.0;
  std::vector<double> t0(3, 0.0);
  for (const auto& e : mdata) {
    zl += ce->Value(t0, e.label);
    el += ce->Value(merm.Apply(e.x), e.label);
  }
  CHECK(el < zl);
}
