#pragma once

// Random instance generators and brute-force oracles used only by tests.

#include <qkdsec/qkdsec.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace qkdsec::testing {

inline Matrix random_complex(std::size_t rows, std::size_t cols, CounterRng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g;
}

inline HermitianOperator random_hermitian(const Dims& dims, CounterRng& rng) {
  const auto d = detail::dim_product(dims);
  Matrix g = random_complex(d, d, rng);
  return {dims, (g + g.adjoint()) * 0.5};
}

// G G^dagger / tr with G of size d x rank, scaled to the given trace.
inline HermitianOperator random_state(const Dims& dims, CounterRng& rng, std::size_t rank = 0, double trace = 1.0) {
  const auto d = detail::dim_product(dims);
  if (rank == 0 || rank > d) rank = d;
  Matrix g = random_complex(d, rank, rng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return {dims, m * trace};
}

// Full-rank state with eigenvalues bounded away from zero (keeps sigma^-1/2 well conditioned).
inline HermitianOperator random_sigma(const Dims& dims, CounterRng& rng, double trace = 1.0) {
  const auto d = detail::dim_product(dims);
  Matrix g = random_complex(d, d, rng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.8 * m + 0.2 / static_cast<double>(d) * Matrix::Identity(d, d);
  return {dims, m * trace};
}

inline std::vector<double> random_weights(std::size_t n, CounterRng& rng, double zero_prob = 0.0, double total = 1.0) {
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& v : w) {
    v = rng.bernoulli(zero_prob) ? 0.0 : -std::log(1.0 - rng.uniform());
    s += v;
  }
  if (s == 0.0) {
    w[0] = 1.0;
    s = 1.0;
  }
  for (auto& v : w) v *= total / s;
  return w;
}

// Elementwise Kronecker product by a direct double loop over row/column pairs.
inline Matrix kron_oracle(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return m;
}

// Smallest lambda with lambda id (x) sigma - rho >= 0, by bisection on the minimum eigenvalue.
inline double min_lambda_bisection(const HermitianOperator& rho, const HermitianOperator& sigma) {
  const std::size_t da = rho.dim() / sigma.dim();
  const Matrix lifted = detail::lift(da, sigma.matrix());
  auto feasible = [&](double lambda) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(lambda * lifted - rho.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -1e-13;
  };
  double lo = 0.0, hi = 1.0;
  while (!feasible(hi)) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Block-diagonal sum_z rho^z (x) |z><z| with Z as the last factor.
inline HermitianOperator classical_last(const std::vector<HermitianOperator>& parts) {
  const std::size_t nz = parts.size();
  Dims dims = parts.front().dims();
  dims.push_back(nz);
  const auto d = detail::dim_product(dims);
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t z = 0; z < nz; ++z) {
    Matrix proj = Matrix::Zero(nz, nz);
    proj(z, z) = 1.0;
    m += kron_oracle(parts[z].matrix(), proj);
  }
  return {dims, m};
}

}  // namespace qkdsec::testing
