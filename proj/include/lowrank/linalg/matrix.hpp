// Copyright 2026 The lowrank-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace lowrank::linalg {

// Dense row-major matrix of doubles. Zero-sized shapes are allowed so that
// an empty basis (e.g. the nullspace of a full-rank matrix) is representable.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix identity(std::size_t n);
  static Matrix diag(const std::vector<double>& values);
  static Matrix diag(std::size_t rows, std::size_t cols, const std::vector<double>& values);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(const std::vector<double>& values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  Matrix col_range(std::size_t c0, std::size_t nc) const { return block(0, c0, rows_, nc); }
  Matrix row_range(std::size_t r0, std::size_t nr) const { return block(r0, 0, nr, cols_); }
  void set_block(std::size_t r0, std::size_t c0, const Matrix& src);
  std::vector<double> col(std::size_t j) const;
  std::vector<double> row(std::size_t i) const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  double frobenius_norm() const;
  double squared_norm() const;
  double max_abs() const;
  double trace() const;
  bool all_finite() const;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
bool operator==(const Matrix& a, const Matrix& b);

Matrix matmul_tn(const Matrix& a, const Matrix& b);  // aᵀ·b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a·bᵀ
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix hstack(const Matrix& a, const Matrix& b);
Matrix vstack(const Matrix& a, const Matrix& b);

// Product of a list applied right to left: mats.back() * ... * mats.front().
Matrix chain_product(const std::vector<Matrix>& mats, std::size_t begin, std::size_t end);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace lowrank::linalg
