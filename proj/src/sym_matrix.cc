// Copyright 2026 The mcrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mcrelax/sym_matrix.h"

#include <cmath>
#include <stdexcept>

namespace mcrelax {

namespace {

void RequireSameDim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("symmetric matrix dimension mismatch: " +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}

}  // namespace

SymMatrix SymMatrix::Identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::Diagonal(const std::vector<double>& diag) {
  SymMatrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = diag[i];
  return m;
}

SymMatrix SymMatrix::FromDense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) {
    throw std::invalid_argument("FromDense: matrix is not square");
  }
  SymMatrix m(static_cast<int>(dense.rows()));
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = i; j < m.dim(); ++j) m(i, j) = dense(i, j);
  }
  return m;
}

Eigen::MatrixXd SymMatrix::ToDense() const {
  Eigen::MatrixXd out(dim_, dim_);
  std::size_t k = 0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j, ++k) {
      out(i, j) = data_[k];
      out(j, i) = data_[k];
    }
  }
  return out;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  RequireSameDim(*this, other);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  RequireSameDim(*this, other);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& d : data_) d *= s;
  return *this;
}

bool SymMatrix::IsFinite() const {
  for (double d : data_) {
    if (!std::isfinite(d)) return false;
  }
  return true;
}

SymEigen EigSym(const SymMatrix& m) {
  if (!m.IsFinite()) throw std::invalid_argument("EigSym: non-finite entry");
  if (m.dim() == 0) return {Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.ToDense());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("EigSym: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix ProjPsd(const SymMatrix& m) {
  const SymEigen eig = EigSym(m);
  const int n = m.dim();
  int n_pos = 0;
  for (int i = 0; i < n; ++i) n_pos += eig.values[i] > 0.0 ? 1 : 0;
  if (n_pos == n) return m;
  if (n_pos == 0) return SymMatrix(n);
  // Eigenvalues are ascending, so the positive ones are the trailing block.
  const int first = n - n_pos;
  Eigen::MatrixXd scaled = eig.vectors.rightCols(n_pos);
  for (int k = 0; k < n_pos; ++k) {
    scaled.col(k) *= std::sqrt(eig.values[first + k]);
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  dense.selfadjointView<Eigen::Upper>().rankUpdate(scaled);
  SymMatrix out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out(i, j) = dense(i, j);
  }
  return out;
}

double Frob(const SymMatrix& a, const SymMatrix& b) {
  RequireSameDim(a, b);
  const int n = a.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s += a(i, i) * b(i, i);
    for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * b(i, j);
  }
  return s;
}

double FrobNorm(const SymMatrix& a) { return std::sqrt(Frob(a, a)); }

double MinEigenvalue(const SymMatrix& m) {
  if (m.dim() == 0) return 0.0;
  return EigSym(m).values[0];
}

}  // namespace mcrelax
