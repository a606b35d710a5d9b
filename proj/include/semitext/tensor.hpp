#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace semitext {

// Dense row-major double tensor. Rank is 1 or 2 everywhere in this project.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::initializer_list<std::size_t> dims) {
    Tensor t;
    t.shape.assign(dims);
    std::size_t n = 1;
    for (auto d : t.shape) n *= d;
    t.data.assign(n, 0.0);
    return t;
  }

  std::size_t numel() const { return data.size(); }
  bool empty() const { return data.empty(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double* row_ptr(std::size_t r) { return data.data() + r * cols(); }
  const double* row_ptr(std::size_t r) const { return data.data() + r * cols(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  void add_scaled(const Tensor& other, double scale) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += scale * other.data[i];
  }
  void add(const Tensor& other) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += other.data[i];
  }
};

}  // namespace semitext
