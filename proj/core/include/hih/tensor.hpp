#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hih {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {
struct Node;
}

/// View handed to an op's backward function. grad_in(i) is empty when input i
/// does not take part in differentiation; otherwise it must be accumulated
/// into (+=), never overwritten.
class BackwardContext {
 public:
  BackwardContext(std::span<const double> grad_out, std::span<const double> output,
                  std::vector<std::span<double>> grad_in)
      : grad_out_(grad_out), output_(output), grad_in_(std::move(grad_in)) {}

  std::span<const double> grad_out() const { return grad_out_; }
  std::span<const double> output() const { return output_; }
  std::span<double> grad_in(std::size_t i) const { return grad_in_.at(i); }
  bool needs(std::size_t i) const { return !grad_in_.at(i).empty(); }

 private:
  std::span<const double> grad_out_;
  std::span<const double> output_;
  std::vector<std::span<double>> grad_in_;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

/// Dense row-major array of 64-bit floats with an optional reverse-mode
/// gradient. A Tensor is a cheap handle; copies share the same storage.
///
/// Tensors created through ops record their inputs when any input requires a
/// gradient and gradient recording is enabled (see NoGradGuard). Calling
/// backward() on a scalar result accumulates d(result)/d(leaf) into every
/// leaf that requires a gradient and releases the recorded graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Writable view of the values. Intended for leaves (parameters, inputs);
  // mutating a recorded intermediate invalidates its gradient.
  std::span<double> mutable_data();
  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  // Empty span when no gradient has been accumulated.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  void backward() const;

  // Copy of the values with no graph history.
  Tensor detach() const;
  Tensor clone(bool requires_grad) const;

  const std::string& op_name() const;
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_op(std::string op, Shape shape, std::vector<double> data,
                        std::vector<Tensor> inputs, BackwardFn backward);

  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording for its lifetime (inference, parameter updates).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Builds the result of a differentiable op. Throws NumericError naming `op`
// when `data` contains a non-finite value.
Tensor make_op(std::string op, Shape shape, std::vector<double> data,
               std::vector<Tensor> inputs, BackwardFn backward);

}  // namespace hih
