#pragma once

// Central finite-difference gradient oracle, independent of the tape:
// perturbs each input entry by +-h and compares the numeric slope of a
// scalar-valued function against the tape gradient.

#include "scnet/tensor.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace fd {

struct Report {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  size_t checked = 0;
};

// f maps the current contents of `values` to a scalar (rebuilding the whole
// forward pass); grad is the tape gradient for those entries.
inline Report check(std::vector<double>& values, const std::vector<double>& grad,
                    const std::function<double()>& f, double h = 1e-5) {
  Report r;
  for (size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = f();
    values[i] = keep - h;
    const double down = f();
    values[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double abs_err = std::abs(numeric - grad[i]);
    const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
    r.max_abs_err = std::max(r.max_abs_err, abs_err);
    r.max_rel_err = std::max(r.max_rel_err, abs_err / denom);
    ++r.checked;
  }
  return r;
}

}  // namespace fd
