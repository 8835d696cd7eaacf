// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_PARAMS_HPP
#define BQE_PARAMS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "bqe/mat.hpp"

namespace bqe {

// A named learnable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;
};

// Ordered collection of parameters. Creation order is deterministic and is
// the serialization order; lookup is by name.
class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  void zero_grads();
  size_t param_count() const { return params_.size(); }
  size_t scalar_count() const;
  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  std::vector<Param*> with_prefix(const std::string& prefix);

  void set_trainable_prefix(const std::string& prefix, bool trainable);
  // Copies values (by name) from another store; every source param must exist
  // here with the same shape.
  void load_values_from(const ParamStore& other);
  // FNV-1a over the raw value bytes of params matching the prefix; exact
  // equality check for the frozen-parameter contract.
  uint64_t checksum(const std::string& prefix = "") const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, size_t> index_;
};

// Uniform fan-in init: U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
void init_uniform_fan_in(Mat& w, int fan_in, std::mt19937_64& rng);

// Creates weight (in x out) and bias (1 x out) named <prefix>.w / <prefix>.b.
// Weights use fan-in init, biases start at zero; zero_init zeroes both.
void create_linear(ParamStore& store, const std::string& prefix, int in, int out,
                   std::mt19937_64& rng, bool zero_init = false);

}

#endif
