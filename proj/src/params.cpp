#include "somnnet/params.hpp"

#include <cmath>

#include "somnnet/error.hpp"

namespace somnnet {

Array Array::zeros(std::vector<int> s) {
  size_t n = 1;
  for (int d : s) n *= static_cast<size_t>(d);
  Array a;
  a.shape = std::move(s);
  a.v.assign(n, 0.0);
  return a;
}

Array* ParameterStore::find(const std::string& name) {
  for (auto& [k, a] : items) {
    if (k == name) return &a;
  }
  return nullptr;
}

const Array* ParameterStore::find(const std::string& name) const {
  for (const auto& [k, a] : items) {
    if (k == name) return &a;
  }
  return nullptr;
}

Array& ParameterStore::at(const std::string& name) {
  Array* a = find(name);
  if (!a) throw ParameterError("parameter store: no array named '" + name + "'");
  return *a;
}

const Array& ParameterStore::at(const std::string& name) const {
  const Array* a = find(name);
  if (!a) throw ParameterError("parameter store: no array named '" + name + "'");
  return *a;
}

void ParameterStore::add(const std::string& name, Array a) {
  if (has(name))
    throw ParameterError("parameter store: duplicate array '" + name + "'");
  items.emplace_back(name, std::move(a));
}

bool ParameterStore::erase(const std::string& name) {
  for (auto it = items.begin(); it != items.end(); ++it) {
    if (it->first == name) {
      items.erase(it);
      return true;
    }
  }
  return false;
}

static bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_prunable_name(const std::string& name) {
  return ends_with(name, ".kernel") || ends_with(name, ".weight");
}

bool is_trainable_name(const std::string& name) {
  return !ends_with(name, ".mmean") && !ends_with(name, ".mvar") &&
         !ends_with(name, ".mask") && !ends_with(name, ".latent");
}

long long total_value_count(const ParameterStore& store) {
  long long n = 0;
  for (const auto& [k, a] : store.items) n += a.size();
  return n;
}

AdamState AdamState::init_for(const ParameterStore& params,
                              double learning_rate) {
  AdamState st;
  st.learning_rate = learning_rate;
  for (const auto& [name, a] : params.items) {
    if (!is_trainable_name(name)) continue;
    st.moments.emplace_back(
        name, std::make_pair(std::vector<double>(a.v.size(), 0.0),
                             std::vector<double>(a.v.size(), 0.0)));
  }
  return st;
}

std::pair<std::vector<double>, std::vector<double>>* AdamState::find(
    const std::string& name) {
  for (auto& [k, mv] : moments) {
    if (k == name) return &mv;
  }
  return nullptr;
}

void adam_step(ParameterStore& params, const ParameterStore& grads,
               AdamState& state) {
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (const auto& [name, g] : grads.items) {
    Array* p = params.find(name);
    if (!p) throw ShapeError("adam: gradient for unknown array '" + name + "'");
    if (!p->same_shape(g))
      throw ShapeError("adam: shape mismatch for array '" + name + "'");
    auto* mv = state.find(name);
    if (!mv) throw ShapeError("adam: no moments for array '" + name + "'");
    auto& [m, v] = *mv;
    if (m.size() != g.v.size())
      throw ShapeError("adam: moment size mismatch for array '" + name + "'");
    for (size_t i = 0; i < g.v.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g.v[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g.v[i] * g.v[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p->v[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

}  // namespace somnnet
