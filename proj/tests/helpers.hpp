#pragma once

#include <initializer_list>

#include "pvs/types.hpp"

inline pvs::Vec vec(std::initializer_list<double> v) {
  pvs::Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline pvs::Vec scalar(double x) { return vec({x}); }
