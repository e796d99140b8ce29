#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "laborcast/errors.hpp"
#include "laborcast/rng.hpp"
#include "laborcast/svr.hpp"

using namespace laborcast;

namespace {

// Independent dual solve: projected gradient ascent on the smooth
// (alpha, alpha*) formulation. Projection onto the box intersected with
// sum(alpha - alpha*) = 0 is exact via bisection on the shift.
double brute_force_dual(const Matrix& x, const std::vector<double>& y, const SvrConfig& cfg,
                        long iterations, std::vector<double>* beta_out = nullptr) {
  const std::size_t n = x.rows();
  const double c = cfg.c_penalty;
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(x.cols());
  Matrix k(n, n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k(i, j) = rbf_kernel(x.row(i), x.row(j), gamma);
    trace += k(i, i);
  }
  const double step = 1.0 / (2.0 * trace + 1.0);  // 1/L with L <= 2 tr(K)

  std::vector<double> a(n, 0.0), a_star(n, 0.0);
  auto project = [&](std::vector<double>& va, std::vector<double>& vs) {
    auto balance = [&](double shift) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        total += std::clamp(va[i] - shift, 0.0, c) - std::clamp(vs[i] + shift, 0.0, c);
      return total;
    };
    double lo = -1.0, hi = 1.0;
    while (balance(lo) < 0.0) lo *= 2.0;
    while (balance(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (balance(mid) > 0.0 ? lo : hi) = mid;
    }
    const double shift = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
      va[i] = std::clamp(va[i] - shift, 0.0, c);
      vs[i] = std::clamp(vs[i] + shift, 0.0, c);
    }
  };

  std::vector<double> kb(n);
  for (long it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      kb[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) kb[i] += k(i, j) * (a[j] - a_star[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      a[i] += step * (-kb[i] - cfg.epsilon_tube + y[i]);
      a_star[i] += step * (kb[i] - cfg.epsilon_tube - y[i]);
    }
    project(a, a_star);
  }

  std::vector<double> beta(n);
  for (std::size_t i = 0; i < n; ++i) beta[i] = a[i] - a_star[i];
  if (beta_out) *beta_out = beta;
  return svr_dual_objective(x, y, beta, cfg);
}

// Jacobi eigenvalue sweep for small symmetric matrices (test oracle).
std::vector<double> symmetric_eigenvalues(Matrix m) {
  const std::size_t n = m.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-30) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = cs * mip - sn * miq;
          m(i, q) = sn * mip + cs * miq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = cs * mpi - sn * mqi;
          m(q, i) = sn * mpi + cs * mqi;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = m(i, i);
  return eig;
}

Matrix five_point_instance(std::vector<double>& y) {
  Matrix x = Matrix::from_rows({{0.0}, {0.7}, {1.5}, {2.2}, {3.0}});
  y = {0.2, 1.1, 1.9, 1.4, 0.3};
  return x;
}

}  // namespace

TEST_CASE("rbf kernel basics") {
  const std::vector<double> a = {1.0, 2.0};
  CHECK(rbf_kernel(a, a, 0.7) == 1.0);
  CHECK(rbf_kernel(std::vector<double>{0.0}, std::vector<double>{1.0}, 1.0) ==
        doctest::Approx(std::exp(-1.0)));
  SplitMix64 rng(1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> u(3), v(3);
    for (auto* vec : {&u, &v})
      for (double& e : *vec) e = rng.uniform(-2.0, 2.0);
    CHECK(rbf_kernel(u, v, 0.5) == rbf_kernel(v, u, 0.5));
  }
  CHECK_THROWS_AS(rbf_kernel(std::vector<double>{1.0}, a, 1.0), DataError);
}

TEST_CASE("targets inside the tube give the constant model") {
  Matrix x = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
  const std::vector<double> y(4, 2.5);
  SvrConfig cfg;
  cfg.epsilon_tube = 0.1;
  const SvrModel m = fit_svr(x, y, cfg);
  CHECK(m.support_rows.rows() == 0);
  CHECK(m.bias == doctest::Approx(2.5));
  for (double p : predict_svr(m, x)) CHECK(p == doctest::Approx(2.5));
}

TEST_CASE("SMO matches the projected-gradient dual solve on a 5-point instance") {
  std::vector<double> y;
  const Matrix x = five_point_instance(y);
  SvrConfig cfg;
  cfg.c_penalty = 2.0;
  cfg.epsilon_tube = 0.1;
  cfg.gamma = 0.5;
  cfg.kkt_tolerance = 1e-10;
  cfg.max_passes = 2000;

  SvrFitTrace trace;
  const SvrModel m = fit_svr(x, y, cfg, &trace);
  const double smo_objective = svr_dual_objective(x, y, trace.beta, cfg);

  std::vector<double> oracle_beta;
  const double oracle_objective = brute_force_dual(x, y, cfg, 1000000, &oracle_beta);
  CHECK(std::abs(smo_objective - oracle_objective) < 1e-6);

  // prediction at a support row matches the oracle's decision function
  REQUIRE(m.support_rows.rows() > 0);
  const auto preds = predict_svr(m, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double oracle_f = m.bias;
    for (std::size_t j = 0; j < x.rows(); ++j)
      oracle_f += oracle_beta[j] * rbf_kernel(x.row(j), x.row(i), cfg.gamma);
    CHECK(std::abs(preds[i] - oracle_f) < 1e-5);
  }
}

TEST_CASE("KKT audit: residuals exceed the tube only at bounded coefficients") {
  std::vector<double> y;
  const Matrix x = five_point_instance(y);
  SvrConfig cfg;
  cfg.c_penalty = 0.5;  // low C forces bounded support vectors
  cfg.epsilon_tube = 0.05;
  cfg.gamma = 0.5;
  cfg.kkt_tolerance = 1e-10;
  cfg.max_passes = 2000;
  SvrFitTrace trace;
  const SvrModel m = fit_svr(x, y, cfg, &trace);
  const auto preds = predict_svr(m, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double slack = std::abs(y[i] - preds[i]) - cfg.epsilon_tube;
    if (slack > 1e-7) CHECK(std::abs(trace.beta[i]) == doctest::Approx(cfg.c_penalty));
  }
}

TEST_CASE("dual feasibility and determinism after fit") {
  SplitMix64 rng(33);
  Matrix x(12, 2);
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) {
    x(i, 0) = rng.uniform(-1.0, 1.0);
    x(i, 1) = rng.uniform(-1.0, 1.0);
    y[i] = std::sin(2.0 * x(i, 0)) + 0.3 * x(i, 1);
  }
  SvrConfig cfg;
  cfg.c_penalty = 3.0;
  cfg.epsilon_tube = 0.05;
  cfg.kkt_tolerance = 1e-8;
  cfg.max_passes = 1000;

  SvrFitTrace ta, tb;
  const SvrModel a = fit_svr(x, y, cfg, &ta);
  const SvrModel b = fit_svr(x, y, cfg, &tb);
  CHECK(ta.beta == tb.beta);
  CHECK(a.bias == b.bias);
  CHECK(a.converged);

  double sum = 0.0;
  for (double v : ta.beta) {
    sum += v;
    CHECK(std::abs(v) <= cfg.c_penalty);
  }
  CHECK(std::abs(sum) <= cfg.kkt_tolerance);
}

TEST_CASE("dual objective is non-decreasing across pair updates") {
  std::vector<double> y;
  const Matrix x = five_point_instance(y);
  SvrConfig cfg;
  cfg.c_penalty = 2.0;
  cfg.epsilon_tube = 0.02;
  cfg.gamma = 1.0;
  cfg.kkt_tolerance = 1e-9;
  cfg.max_passes = 1000;
  SvrFitTrace trace;
  fit_svr(x, y, cfg, &trace);
  REQUIRE(trace.objective.size() > 1);
  for (std::size_t k = 0; k + 1 < trace.objective.size(); ++k)
    CHECK(trace.objective[k + 1] >= trace.objective[k] - 1e-12);
  // the trace is the true dual objective relative to the zero start
  CHECK(trace.objective.back() ==
        doctest::Approx(svr_dual_objective(x, y, trace.beta, cfg)).epsilon(1e-9));
}

TEST_CASE("kernel matrices are positive semidefinite (Jacobi oracle)") {
  SplitMix64 rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x(10, 3);
    for (double& v : x.data()) v = rng.uniform(-2.0, 2.0);
    Matrix k(10, 10);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j) k(i, j) = rbf_kernel(x.row(i), x.row(j), 0.8);
    const auto eig = symmetric_eigenvalues(k);
    for (double lambda : eig) CHECK(lambda > -1e-8);
  }
}

TEST_CASE("predict_svr basics") {
  SvrModel empty;
  empty.bias = 3.2;
  for (double p : predict_svr(empty, Matrix(4, 2, 1.0))) CHECK(p == 3.2);

  // permutation invariance of the support sum
  SplitMix64 rng(55);
  SvrModel m;
  m.gamma = 0.5;
  m.bias = 0.4;
  m.support_rows = Matrix(6, 2);
  m.dual_coefficients.resize(6);
  for (double& v : m.support_rows.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : m.dual_coefficients) v = rng.uniform(-2.0, 2.0);

  SvrModel shuffled = m;
  std::vector<std::size_t> order = {3, 0, 5, 1, 4, 2};
  for (std::size_t k = 0; k < 6; ++k) {
    shuffled.dual_coefficients[k] = m.dual_coefficients[order[k]];
    for (std::size_t c = 0; c < 2; ++c) shuffled.support_rows(k, c) = m.support_rows(order[k], c);
  }
  const Matrix probe(5, 2, 0.3);
  const auto pa = predict_svr(m, probe);
  const auto pb = predict_svr(shuffled, probe);
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(std::abs(pa[i] - pb[i]) < 1e-12);

  CHECK_THROWS_AS(predict_svr(m, Matrix(2, 5)), DataError);
}

TEST_CASE("exhausted passes leave a convergence warning") {
  std::vector<double> y;
  const Matrix x = five_point_instance(y);
  SvrConfig cfg;
  cfg.epsilon_tube = 0.0;
  cfg.kkt_tolerance = 1e-14;
  cfg.max_passes = 1;
  const SvrModel m = fit_svr(x, y, cfg);
  CHECK_FALSE(m.converged);
  CHECK_THROWS_AS(fit_svr(Matrix(1, 1), {1.0}, cfg), DataError);
}
