// SPDX-License-Identifier: Apache-2.0

#include "bqe/params.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace bqe {

Param& ParamStore::create(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw std::invalid_argument("param '" + name + "' already exists");
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Mat(rows, cols);
  p->grad = Mat(rows, cols);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("param '" + name + "' not found");
  return *params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("param '" + name + "' not found");
  return *params_[it->second];
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) != 0; }

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.fill(0.0);
}

size_t ParamStore::scalar_count() const {
  size_t total = 0;
  for (const auto& p : params_) total += p->value.size();
  return total;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Param*> ParamStore::with_prefix(const std::string& prefix) {
  std::vector<Param*> out;
  for (auto& p : params_)
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  return out;
}

void ParamStore::set_trainable_prefix(const std::string& prefix, bool trainable) {
  for (auto& p : params_)
    if (p->name.rfind(prefix, 0) == 0) p->trainable = trainable;
}

void ParamStore::load_values_from(const ParamStore& other) {
  for (const auto& src : other.params_) {
    Param& dst = get(src->name);
    if (!dst.value.same_shape(src->value))
      throw std::invalid_argument("param '" + src->name + "' shape mismatch on load");
    dst.value = src->value;
  }
}

uint64_t ParamStore::checksum(const std::string& prefix) const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : params_) {
    if (p->name.rfind(prefix, 0) != 0) continue;
    mix(p->name.data(), p->name.size());
    mix(p->value.a.data(), p->value.a.size() * sizeof(double));
  }
  return h;
}

void init_uniform_fan_in(Mat& w, int fan_in, std::mt19937_64& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : w.a) v = dist(rng);
}

void create_linear(ParamStore& store, const std::string& prefix, int in, int out,
                   std::mt19937_64& rng, bool zero_init) {
  Param& w = store.create(prefix + ".w", in, out);
  Param& b = store.create(prefix + ".b", 1, out);
  if (!zero_init) {
    init_uniform_fan_in(w.value, in, rng);
    init_uniform_fan_in(b.value, in, rng);
  }
}

}
