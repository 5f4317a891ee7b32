#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bell_state.hpp"

namespace qkdsec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<std::size_t>;

inline constexpr std::size_t kMaxOperatorDim = 16;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNonnegativeTol = 1e-10;
inline constexpr double kSupportCutoff = 1e-10;

namespace detail {

inline std::size_t dim_product(const Dims& dims) {
  std::size_t d = 1;
  for (auto f : dims) {
    if (f == 0) throw std::invalid_argument("tensor factor of dimension 0");
    d *= f;
    if (d > kMaxOperatorDim)
      throw std::length_error("operator dimension exceeds " + std::to_string(kMaxOperatorDim));
  }
  return d;
}

// Multi-index of a flat index; factor 0 is the most significant digit.
inline std::vector<std::size_t> unflatten(std::size_t i, const Dims& dims) {
  std::vector<std::size_t> m(dims.size());
  for (std::size_t f = dims.size(); f-- > 0;) {
    m[f] = i % dims[f];
    i /= dims[f];
  }
  return m;
}

inline std::size_t flatten(const std::vector<std::size_t>& m, const Dims& dims) {
  std::size_t i = 0;
  for (std::size_t f = 0; f < dims.size(); ++f) i = i * dims[f] + m[f];
  return i;
}

}  // namespace detail

// Dense Hermitian matrix on a tensor product of small factors.
// An empty dims list is the trivial one-dimensional system (a scalar).
class HermitianOperator {
 public:
  HermitianOperator(Dims dims, const Matrix& entries) : dims_(std::move(dims)) {
    const std::size_t d = detail::dim_product(dims_);
    if (static_cast<std::size_t>(entries.rows()) != d ||
        static_cast<std::size_t>(entries.cols()) != d)
      throw std::invalid_argument("matrix size does not match factor dimensions");
    if (!entries.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    const double drift = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (drift > kHermitianTol * scale)
      throw std::invalid_argument("matrix is not Hermitian (drift " + std::to_string(drift) + ")");
    m_ = (entries + entries.adjoint()) * 0.5;
  }

  static HermitianOperator scalar(double v) { return {{}, Matrix::Constant(1, 1, v)}; }

  static HermitianOperator identity(const Dims& dims) {
    const auto d = detail::dim_product(dims);
    return {dims, Matrix::Identity(d, d)};
  }

  static HermitianOperator maximally_mixed(const Dims& dims) {
    const auto d = detail::dim_product(dims);
    return {dims, Matrix::Identity(d, d) / static_cast<double>(d)};
  }

  static HermitianOperator from_diagonal(const Dims& dims, const std::vector<double>& diag) {
    const auto d = detail::dim_product(dims);
    if (diag.size() != d) throw std::invalid_argument("diagonal length does not match dimension");
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = diag[i];
    return {dims, m};
  }

  // |psi><psi| without normalization.
  static HermitianOperator projector(const Dims& dims, const Vector& psi) {
    const auto d = detail::dim_product(dims);
    if (static_cast<std::size_t>(psi.size()) != d)
      throw std::invalid_argument("vector length does not match dimension");
    return {dims, psi * psi.adjoint()};
  }

  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }

  HermitianOperator& operator+=(const HermitianOperator& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  HermitianOperator& operator-=(const HermitianOperator& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  HermitianOperator& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

 private:
  void check_same(const HermitianOperator& o) const {
    if (o.dims_ != dims_) throw std::invalid_argument("operator factor dimensions differ");
  }

  Dims dims_;
  Matrix m_;
};

struct Eigenpair {
  double value;
  Vector vector;
};

// Eigenvalues in descending order; equal values keep the solver's order.
inline std::vector<Eigenpair> spectral_decomposition(const HermitianOperator& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  std::vector<Eigenpair> out;
  out.reserve(s.dim());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
  std::stable_sort(out.begin(), out.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.value > b.value; });
  return out;
}

inline std::vector<double> eigenvalues(const HermitianOperator& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix(), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

inline double lambda_max(const HermitianOperator& s) { return eigenvalues(s).front(); }
inline double lambda_min(const HermitianOperator& s) { return eigenvalues(s).back(); }

inline bool is_nonnegative(const HermitianOperator& s, double tol = kNonnegativeTol) {
  return lambda_min(s) >= -tol;
}

inline bool is_zero(const HermitianOperator& s, double tol = kSupportCutoff) {
  return s.matrix().cwiseAbs().maxCoeff() <= tol;
}

inline double trace_norm(const HermitianOperator& s) {
  double t = 0.0;
  for (double l : eigenvalues(s)) t += std::abs(l);
  return t;
}

// V f(D) V^dagger, with f applied to each eigenvalue.
inline HermitianOperator apply_spectral(const HermitianOperator& s,
                                        const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.matrix());
  Eigen::VectorXd d = es.eigenvalues().unaryExpr(f);
  Matrix m = es.eigenvectors() * d.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return {s.dims(), m};
}

inline HermitianOperator support_projector(const HermitianOperator& s,
                                           double cutoff = kSupportCutoff) {
  return apply_spectral(s, [cutoff](double l) { return l > cutoff ? 1.0 : 0.0; });
}

// s^p on the support of s; eigenvalues at or below the cutoff map to 0.
inline HermitianOperator support_power(const HermitianOperator& s, double p,
                                       double cutoff = kSupportCutoff) {
  return apply_spectral(s, [cutoff, p](double l) { return l > cutoff ? std::pow(l, p) : 0.0; });
}

inline HermitianOperator tensor_product(const HermitianOperator& a, const HermitianOperator& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  detail::dim_product(dims);
  const auto na = static_cast<Eigen::Index>(a.dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  Matrix m(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < na; ++j) m.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
  return {dims, m};
}

// A s A^dagger, keeping the factor structure of s.
inline HermitianOperator conjugate(const Matrix& a, const HermitianOperator& s) {
  if (a.rows() != a.cols() || static_cast<std::size_t>(a.rows()) != s.dim())
    throw std::invalid_argument("conjugating matrix has wrong size");
  Matrix m = a * s.matrix() * a.adjoint();
  return {s.dims(), (m + m.adjoint()) * 0.5};
}

inline HermitianOperator partial_trace(const HermitianOperator& rho, const std::vector<std::size_t>& keep) {
  const Dims& dims = rho.dims();
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size()) throw std::invalid_argument("partial trace: factor index out of range");
    if (kept[keep[i]]) throw std::invalid_argument("partial trace: duplicate factor index");
    if (i > 0 && keep[i] < keep[i - 1])
      throw std::invalid_argument("partial trace: kept factors must be increasing");
    kept[keep[i]] = true;
  }
  Dims kdims, tdims;
  for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? kdims : tdims).push_back(dims[f]);

  const std::size_t d = rho.dim();
  std::vector<std::size_t> kidx(d), tidx(d);
  for (std::size_t i = 0; i < d; ++i) {
    auto m = detail::unflatten(i, dims);
    std::vector<std::size_t> km, tm;
    for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? km : tm).push_back(m[f]);
    kidx[i] = detail::flatten(km, kdims);
    tidx[i] = detail::flatten(tm, tdims);
  }
  const std::size_t dk = detail::dim_product(kdims);
  Matrix out = Matrix::Zero(dk, dk);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (tidx[i] == tidx[j]) out(kidx[i], kidx[j]) += rho.matrix()(i, j);
  return {kdims, out};
}

// Output factor p is input factor order[p].
inline HermitianOperator permute_factors(const HermitianOperator& rho, const std::vector<std::size_t>& order) {
  const Dims& dims = rho.dims();
  if (order.size() != dims.size()) throw std::invalid_argument("permutation has wrong length");
  std::vector<bool> seen(dims.size(), false);
  Dims ndims;
  for (auto o : order) {
    if (o >= dims.size() || seen[o]) throw std::invalid_argument("invalid factor permutation");
    seen[o] = true;
    ndims.push_back(dims[o]);
  }
  const std::size_t d = rho.dim();
  std::vector<std::size_t> map(d);
  for (std::size_t i = 0; i < d; ++i) {
    auto m = detail::unflatten(i, dims);
    std::vector<std::size_t> nm(dims.size());
    for (std::size_t p = 0; p < order.size(); ++p) nm[p] = m[order[p]];
    map[i] = detail::flatten(nm, ndims);
  }
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out(map[i], map[j]) = rho.matrix()(i, j);
  return {ndims, out};
}

// Pauli matrices: 0 = identity, 1 = x, 2 = y, 3 = z.
inline Matrix pauli(int i) {
  Matrix m(2, 2);
  const Complex I(0.0, 1.0);
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -I, I, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("Pauli index must be 0..3");
  }
  return m;
}

inline Vector bell_vector(int i) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v = Vector::Zero(4);
  switch (i) {
    case 0: v(0) = r; v(3) = r; break;
    case 1: v(0) = r; v(3) = -r; break;
    case 2: v(1) = r; v(2) = r; break;
    case 3: v(1) = r; v(2) = -r; break;
    default: throw std::invalid_argument("Bell index must be 0..3");
  }
  return v;
}

inline HermitianOperator bell_diagonal_operator(const BellDiagonalState& l) {
  Matrix m = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    Vector v = bell_vector(i);
    m += l[static_cast<std::size_t>(i)] * (v * v.adjoint());
  }
  return {{2, 2}, m};
}

// Classical-quantum operator sum_x |x><x| (x) rho^x, classical factor first.
struct CQState {
  std::vector<std::string> labels;
  std::vector<HermitianOperator> conditionals;

  CQState(std::vector<std::string> l, std::vector<HermitianOperator> c)
      : labels(std::move(l)), conditionals(std::move(c)) {
    if (labels.empty() || labels.size() != conditionals.size())
      throw std::invalid_argument("CQ state needs one conditional operator per label");
    double total = 0.0;
    for (const auto& op : conditionals) {
      if (op.dims() != conditionals.front().dims())
        throw std::invalid_argument("conditional operators act on different spaces");
      if (!is_nonnegative(op)) throw std::domain_error("conditional operator is not nonnegative");
      total += op.trace();
    }
    if (total > 1.0 + 1e-12) throw std::domain_error("CQ state trace exceeds 1");
  }

  HermitianOperator to_operator() const {
    const std::size_t nx = labels.size();
    const Dims& qd = conditionals.front().dims();
    Dims dims{nx};
    dims.insert(dims.end(), qd.begin(), qd.end());
    const auto dq = static_cast<Eigen::Index>(conditionals.front().dim());
    const auto d = static_cast<Eigen::Index>(detail::dim_product(dims));
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < nx; ++x) {
      const auto o = static_cast<Eigen::Index>(x) * dq;
      m.block(o, o, dq, dq) = conditionals[x].matrix();
    }
    return {dims, m};
  }
};

}  // namespace qkdsec
