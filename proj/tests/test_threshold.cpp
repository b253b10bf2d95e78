#include <catch2/catch_amalgamated.hpp>

#include <gbs/covariance.hpp>
#include <gbs/linalg.hpp>
#include <gbs/pnr.hpp>
#include <gbs/threshold.hpp>
#include <gbs/torontonian.hpp>
#include <gbs/unitary.hpp>

#include <algorithm>
#include <cmath>
#include <map>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

gbs::ExperimentConfig make_config(int K, int M, double r, double et, double ei) {
  gbs::ExperimentConfig cfg;
  cfg.K = K;
  cfg.M = M;
  cfg.r = r;
  cfg.eta_t = et;
  cfg.eta_ind = ei;
  return cfg;
}

std::vector<gbs::ClickPattern> all_subsets(int K) {
  std::vector<gbs::ClickPattern> out;
  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    gbs::ClickPattern u;
    for (int k = 0; k < K; ++k) {
      if (mask & (1u << k)) u.push_back(k);
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

TEST_CASE("no-click marginals of the joint sector shrink as ports are added",
          "[threshold]") {
  auto cfg = make_config(4, 2, 0.8, 0.9, 0.6);
  auto T = gbs::haar_random_unitary(cfg.K, 3);

  CHECK(gbs::marginal_noclick_indist(cfg, T, {}) == 1.0);

  gbs::ClickPattern all{0, 1, 2, 3};
  CHECK_THAT(gbs::marginal_noclick_indist(cfg, T, all),
             WithinRel(1.0 / std::sqrt(gbs::det_pd(gbs::q_matrix(cfg, T, 0))), 1e-12));

  double prev = 1.0;
  gbs::ClickPattern grow;
  for (int k = 0; k < cfg.K; ++k) {
    grow.push_back(k);
    double cur = gbs::marginal_noclick_indist(cfg, T, grow);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("no-click marginals agree with the complement determinant identity",
          "[threshold]") {
  auto cfg = make_config(4, 2, 0.8, 0.9, 0.6);
  auto T = gbs::haar_random_unitary(cfg.K, 4);
  auto Q0 = gbs::q_matrix(cfg, T, 0);
  gbs::Matrix Q0inv = Q0.inverse();
  const double detQ = gbs::det_pd(Q0);

  for (const auto& R : {gbs::ClickPattern{0}, gbs::ClickPattern{1, 3},
                        gbs::ClickPattern{0, 1, 2}}) {
    gbs::ClickPattern V;
    for (int k = 0; k < cfg.K; ++k) {
      if (std::find(R.begin(), R.end(), k) == R.end()) V.push_back(k);
    }
    double via_complement =
        1.0 / std::sqrt(detQ * gbs::det_pd(gbs::select_by_ports(Q0inv, V)));
    CHECK_THAT(gbs::marginal_noclick_indist(cfg, T, R),
               WithinRel(via_complement, 1e-10));
  }
}

TEST_CASE("single-photon sector no-click marginals match the reduced determinant",
          "[threshold]") {
  auto cfg = make_config(4, 3, 0.9, 0.85, 0.5);
  auto T = gbs::haar_random_unitary(cfg.K, 5);

  for (int m = 1; m <= cfg.M; ++m) {
    for (const auto& R : {gbs::ClickPattern{}, gbs::ClickPattern{2},
                          gbs::ClickPattern{0, 3}, gbs::ClickPattern{0, 1, 2, 3}}) {
      double direct =
          std::exp(-0.5 * gbs::log_det_pd(gbs::select_by_ports(gbs::q_matrix(cfg, T, m), R)));
      CAPTURE(m, R.size());
      CHECK_THAT(gbs::marginal_noclick_virtual(cfg, T, m, R), WithinRel(direct, 1e-10));
    }
  }

  SECTION("the full-port marginal hits the frozen determinant value") {
    auto cfg1 = make_config(1, 1, 0.9, 0.9, 0.9);
    gbs::Matrix T1 = gbs::Matrix::Identity(1, 1);
    CHECK_THAT(gbs::marginal_noclick_virtual(cfg1, T1, 1, {0}),
               WithinRel(0.92013129957751363774, 1e-13));
  }
}

TEST_CASE("vacuum input never clicks", "[threshold]") {
  auto cfg = make_config(3, 2, 0.0, 0.9, 0.5);
  auto T = gbs::haar_random_unitary(cfg.K, 6);
  CHECK_THAT(gbs::prob_threshold(cfg, T, {}), WithinRel(1.0, 1e-12));
  CHECK_THAT(gbs::prob_threshold(cfg, T, {0}), WithinAbs(0.0, 1e-12));
  CHECK_THAT(gbs::prob_threshold(cfg, T, {0, 1, 2}), WithinAbs(0.0, 1e-12));
}

TEST_CASE("click probabilities sum to one over all detector outcomes", "[threshold]") {
  auto cfg = make_config(4, 2, 0.8, 0.85, 0.5);
  auto T = gbs::haar_random_unitary(cfg.K, 7);

  double total = 0.0;
  for (const auto& u : all_subsets(cfg.K)) {
    double p = gbs::prob_threshold(cfg, T, u);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    total += p;
  }
  CHECK_THAT(total, WithinAbs(1.0, 1e-8));
}

TEST_CASE("perfectly indistinguishable clicks reduce to the torontonian",
          "[threshold]") {
  for (int K = 1; K <= 5; ++K) {
    auto cfg = make_config(K, std::max(1, K / 2), 0.7, 0.9, 1.0);
    auto T = gbs::haar_random_unitary(K, 20 + K);
    auto Q0 = gbs::q_matrix(cfg, T, 0);
    double norm = std::exp(-0.5 * gbs::log_det_pd(Q0));
    for (const auto& u : all_subsets(K)) {
      double ideal = gbs::torontonian(Q0, u) * norm;
      CAPTURE(K, u.size());
      CHECK_THAT(gbs::prob_threshold(cfg, T, u), WithinAbs(ideal, 1e-10));
      CHECK_THAT(gbs::prob_threshold_ideal(cfg, T, u), WithinAbs(ideal, 1e-12));
    }
  }
}

TEST_CASE("click probabilities aggregate the photon-number distribution",
          "[threshold]") {
  auto cfg = make_config(2, 1, 0.5, 0.8, 0.5);
  auto T = gbs::haar_random_unitary(cfg.K, 8);
  gbs::GaussianEngine engine(cfg, T);

  const int cut = 14;
  std::map<std::vector<int>, double> aggregated;
  for (int n = 0; n <= cut; ++n) {
    gbs::OutputPattern cap(cfg.K, n);
    for (const auto& s : gbs::enumerate_subpatterns(cap, n)) {
      std::vector<int> key(cfg.K, 0);
      for (int k = 0; k < cfg.K; ++k) key[k] = s[k] > 0 ? 1 : 0;
      aggregated[key] += engine.prob_total_exact(s);
    }
  }

  for (const auto& u : all_subsets(cfg.K)) {
    std::vector<int> key(cfg.K, 0);
    for (int k : u) key[k] = 1;
    CAPTURE(u.size());
    CHECK_THAT(gbs::prob_threshold(cfg, T, u), WithinAbs(aggregated[key], 2e-4));
  }
}

TEST_CASE("single-port device clicks with the complementary vacuum weight",
          "[threshold]") {
  auto cfg = make_config(1, 1, 0.9, 0.9, 1.0);
  gbs::Matrix T = gbs::Matrix::Identity(1, 1);
  double p0 = 1.0 / std::sqrt(gbs::det_pd(gbs::q_matrix(cfg, T, 0)));
  CHECK_THAT(gbs::prob_threshold_ideal(cfg, T, {0}), WithinRel(1.0 - p0, 1e-12));
  // An empty click set is the exact no-click outcome, i.e. detector vacuum.
  CHECK_THAT(gbs::prob_threshold_ideal(cfg, T, {}), WithinRel(p0, 1e-12));
}

TEST_CASE("click pattern validation", "[threshold]") {
  auto cfg = make_config(3, 1, 0.5, 0.9, 0.9);
  auto T = gbs::haar_random_unitary(cfg.K, 9);
  CHECK_THROWS_AS(gbs::prob_threshold(cfg, T, {0, 0}), gbs::ConfigError);
  CHECK_THROWS_AS(gbs::prob_threshold(cfg, T, {2, 1}), gbs::ConfigError);
  CHECK_THROWS_AS(gbs::prob_threshold(cfg, T, {3}), gbs::ConfigError);
}
