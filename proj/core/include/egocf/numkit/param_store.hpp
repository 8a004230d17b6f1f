#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "egocf/numkit/tensor.hpp"

namespace egocf::numkit {

// Named parameters plus a parallel gradient map. Iteration order is the
// lexicographic order of names, which fixes every reduction order that
// walks the store.
class ParamStore {
 public:
  // Throws ConsistencyError on a duplicate name.
  Tensor& add(const std::string& name, Tensor init);

  bool contains(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;

  // Returns the gradient slot, creating a zero tensor on first access.
  Tensor& grad(const std::string& name);
  bool has_grad(const std::string& name) const;
  const Tensor& grad(const std::string& name) const;

  // Zero-filled gradients for every parameter.
  void zero_grads();
  // Drops all gradient slots.
  void clear_grads();

  std::vector<std::string> names() const;
  std::size_t parameter_count() const;
  std::size_t tensor_count() const { return values_.size(); }

  const std::map<std::string, Tensor>& values() const { return values_; }

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> grads_;
};

}  // namespace egocf::numkit
