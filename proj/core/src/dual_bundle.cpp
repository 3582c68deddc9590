#include "pinncal/autodiff/dual_bundle.hpp"

#include <stdexcept>

namespace pinncal::ad {

DualBundle::DualBundle(double v, int dim)
    : value(v), first(BundleVector::Zero(dim)), second(BundleMatrix::Zero(dim, dim)) {
  if (dim < 0 || dim > kMaxInputs) throw std::invalid_argument("DualBundle: unsupported input count");
}

DualBundle DualBundle::variable(double v, int index, int dim) {
  DualBundle d(v, dim);
  if (index < 0 || index >= dim) throw std::invalid_argument("DualBundle: seed index out of range");
  d.first[index] = 1.0;
  return d;
}

DualBundle operator+(const DualBundle& a, const DualBundle& b) {
  DualBundle r;
  r.value = a.value + b.value;
  r.first = a.first + b.first;
  r.second = a.second + b.second;
  return r;
}

DualBundle operator-(const DualBundle& a, const DualBundle& b) {
  DualBundle r;
  r.value = a.value - b.value;
  r.first = a.first - b.first;
  r.second = a.second - b.second;
  return r;
}

DualBundle operator*(const DualBundle& a, const DualBundle& b) {
  DualBundle r;
  r.value = a.value * b.value;
  r.first = a.value * b.first + b.value * a.first;
  // product rule; the outer products are transposes of each other so the sum stays symmetric
  r.second = a.value * b.second + b.value * a.second + a.first * b.first.transpose() +
             b.first * a.first.transpose();
  return r;
}

DualBundle operator*(double c, const DualBundle& a) {
  DualBundle r;
  r.value = c * a.value;
  r.first = c * a.first;
  r.second = c * a.second;
  return r;
}

DualBundle operator+(const DualBundle& a, double c) {
  DualBundle r = a;
  r.value += c;
  return r;
}

DualBundle& operator+=(DualBundle& a, const DualBundle& b) {
  a.value += b.value;
  a.first += b.first;
  a.second += b.second;
  return a;
}

DualBundle compose(const DualBundle& a, double f, double df, double d2f) {
  DualBundle r;
  r.value = f;
  r.first = df * a.first;
  r.second = d2f * (a.first * a.first.transpose()) + df * a.second;
  return r;
}

DualBundle tanh(const DualBundle& a) {
  const double t = std::tanh(a.value);
  const double t1 = 1.0 - t * t;
  return compose(a, t, t1, -2.0 * t * t1);
}

}  // namespace pinncal::ad
