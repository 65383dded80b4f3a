// Copyright 2026 The Lipsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LIPSYNTH_TENSOR_H_
#define LIPSYNTH_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "lipsynth/error.hpp"
#include "lipsynth/rng.hpp"

namespace lipsynth {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major tensor of doubles with value semantics. The whole
// toolkit trains in double precision; desk-scale models are small enough
// that the extra bandwidth is irrelevant and finite-difference gradient
// checks become unambiguous.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape)
      : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value) { return full({1}, value); }
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng);
  static Tensor gaussian(Shape shape, double mean, double stddev, Rng& rng);

  const Shape& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  // Same data, new shape; element count must match.
  Tensor reshaped(Shape new_shape) const;

  bool all_finite() const;
  double min() const;
  double max() const;
  double sum() const;
  double abs_mean() const;

  void add_(const Tensor& other);            // this += other
  void axpy_(double alpha, const Tensor& t); // this += alpha * t
  void scale_(double alpha);
  void fill_(double v);

 private:
  Shape shape_;
  std::vector<double> data_;
};

// FNV-1a hash over the raw bytes; used for "parameters unchanged"
// assertions in the trainer and the frozen speech encoder.
uint64_t tensor_checksum(const Tensor& t);
uint64_t tensors_checksum(const std::vector<Tensor>& ts);

}  // namespace lipsynth

#endif  // LIPSYNTH_TENSOR_H_
