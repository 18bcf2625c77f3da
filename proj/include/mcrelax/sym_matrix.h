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

// Dense symmetric matrices stored as a packed upper triangle, with the
// eigendecomposition and PSD-cone projection used by the ADMM Y-update.

#ifndef MCRELAX_SYM_MATRIX_H_
#define MCRELAX_SYM_MATRIX_H_

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mcrelax {

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim) : dim_(dim), data_(Packed(dim), 0.0) {}

  static SymMatrix Identity(int dim);
  static SymMatrix Diagonal(const std::vector<double>& diag);
  // Reads the upper triangle of a square matrix.
  static SymMatrix FromDense(const Eigen::MatrixXd& m);

  int dim() const { return dim_; }

  double operator()(int i, int j) const { return data_[Index(i, j)]; }
  double& operator()(int i, int j) { return data_[Index(i, j)]; }

  Eigen::MatrixXd ToDense() const;

  // Packed upper triangle, row-major: (0,0) (0,1) .. (0,n-1) (1,1) ..
  const std::vector<double>& packed() const { return data_; }
  std::vector<double>& packed() { return data_; }

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  bool IsFinite() const;

 private:
  static std::size_t Packed(int n) {
    return static_cast<std::size_t>(n) * (n + 1) / 2;
  }
  std::size_t Index(int i, int j) const {
    if (i > j) std::swap(i, j);
    // Offset of row i in the packed upper triangle, then column shift.
    return static_cast<std::size_t>(i) * dim_ -
           static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
  }

  int dim_ = 0;
  std::vector<double> data_;
};

struct SymEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

// Throws std::invalid_argument on non-finite input.
SymEigen EigSym(const SymMatrix& m);

// Nearest PSD matrix in Frobenius norm: V max(L, 0) V^T.
SymMatrix ProjPsd(const SymMatrix& m);

// Frobenius inner product trace(A^T B); throws on dimension mismatch.
double Frob(const SymMatrix& a, const SymMatrix& b);
double FrobNorm(const SymMatrix& a);

double MinEigenvalue(const SymMatrix& m);

}  // namespace mcrelax

#endif  // MCRELAX_SYM_MATRIX_H_
