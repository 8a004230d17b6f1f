#include "egocf/numkit/param_store.hpp"

#include <utility>

#include "egocf/errors.hpp"

namespace egocf::numkit {

Tensor& ParamStore::add(const std::string& name, Tensor init) {
  auto [it, inserted] = values_.emplace(name, std::move(init));
  if (!inserted) throw ConsistencyError("duplicate parameter name: " + name);
  return it->second;
}

bool ParamStore::contains(const std::string& name) const {
  return values_.count(name) > 0;
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConsistencyError("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConsistencyError("unknown parameter: " + name);
  return it->second;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = grads_.find(name);
  if (it != grads_.end()) return it->second;
  const Tensor& v = value(name);
  return grads_.emplace(name, Tensor(v.shape())).first->second;
}

bool ParamStore::has_grad(const std::string& name) const {
  return grads_.count(name) > 0;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    throw ConsistencyError("no gradient recorded for parameter: " + name);
  }
  return it->second;
}

void ParamStore::zero_grads() {
  for (const auto& [name, v] : values_) {
    auto it = grads_.find(name);
    if (it == grads_.end()) {
      grads_.emplace(name, Tensor(v.shape()));
    } else {
      it->second.fill(0.0);
    }
  }
}

void ParamStore::clear_grads() { grads_.clear(); }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, v] : values_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, v] : values_) total += v.size();
  return total;
}

}  // namespace egocf::numkit
