#include "stlsynth/run.hpp"

#include <stdexcept>

namespace stlsynth {

Eigen::VectorXd Run::point(size_t k, int m) const {
  Eigen::VectorXd r(stateDim() + m);
  r.head(stateDim()) = states.at(k);
  if (k < inputs.size())
    r.tail(m) = inputs[k];
  else
    r.tail(m).setZero();
  return r;
}

void Run::validate() const {
  if (!(Ts > 0)) throw std::invalid_argument("run sampling period must be positive");
  if (!inputs.empty() && (inputs.size() > states.size() || inputs.size() + 1 < states.size()))
    throw std::invalid_argument("run must have no inputs, as many inputs as states, or one fewer");
  for (auto& x : states)
    if (x.size() != stateDim() || !x.allFinite())
      throw std::invalid_argument("run states have inconsistent dimension or non-finite values");
  for (auto& u : inputs)
    if (u.size() != inputDim() || !u.allFinite())
      throw std::invalid_argument("run inputs have inconsistent dimension or non-finite values");
}

}  // namespace stlsynth
