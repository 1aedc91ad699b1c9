#include "cfisac/real_embedding.hpp"

namespace cfisac {

RVec embed(const CMat& W) {
  RVec x(2 * W.size());
  embed_into(W, x, 0);
  return x;
}

void embed_into(const CMat& W, RVec& x, int offset) {
  const Eigen::Index m = W.rows();
  for (Eigen::Index i = 0; i < W.cols(); ++i) {
    x.segment(offset + i * 2 * m, m) = W.col(i).real();
    x.segment(offset + i * 2 * m + m, m) = W.col(i).imag();
  }
}

CMat unembed(const RVec& x, int rows, int cols, int offset) {
  CMat W(rows, cols);
  for (int i = 0; i < cols; ++i) {
    const int base = offset + i * 2 * rows;
    for (int m = 0; m < rows; ++m) W(m, i) = cx(x(base + m), x(base + rows + m));
  }
  return W;
}

RVec re_inner(const CVec& c) {
  // Re{c^H w} = Re c . Re w + Im c . Im w
  RVec r(2 * c.size());
  r << c.real(), c.imag();
  return r;
}

RVec im_inner(const CVec& c) {
  // Im{c^H w} = Re c . Im w - Im c . Re w
  RVec r(2 * c.size());
  r << -c.imag(), c.real();
  return r;
}

}  // namespace cfisac
