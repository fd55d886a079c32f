#pragma once

#include <cstddef>
#include <vector>

namespace numta::test {

// Brute force straight from the pairs, no confusion matrix involved.
struct Oracle {
  std::vector<double> p, r, f;
  std::vector<std::size_t> s;
  double acc, macro_p, macro_r, macro_f, w_p, w_r, w_f;
};

inline Oracle oracle(const std::vector<int>& yt, const std::vector<int>& yp) {
  Oracle o;
  const std::size_t n = yt.size();
  double correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += yt[i] == yp[i];
  o.acc = correct / double(n);
  o.macro_p = o.macro_r = o.macro_f = o.w_p = o.w_r = o.w_f = 0;
  for (int c = 0; c < 10; ++c) {
    double tp = 0, pred = 0, truth = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += yt[i] == c && yp[i] == c;
      pred += yp[i] == c;
      truth += yt[i] == c;
    }
    double p = pred > 0 ? tp / pred : 0, r = truth > 0 ? tp / truth : 0;
    double f = p + r > 0 ? 2 * p * r / (p + r) : 0;
    o.p.push_back(p);
    o.r.push_back(r);
    o.f.push_back(f);
    o.s.push_back(std::size_t(truth));
    o.macro_p += p / 10;
    o.macro_r += r / 10;
    o.macro_f += f / 10;
    o.w_p += p * truth / double(n);
    o.w_r += r * truth / double(n);
    o.w_f += f * truth / double(n);
  }
  return o;
}

}  // namespace numta::test
