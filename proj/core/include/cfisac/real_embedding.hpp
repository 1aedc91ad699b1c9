#pragma once

#include "cfisac/types.hpp"

namespace cfisac {

// Column-major real embedding of an M x D complex matrix: column i occupies
// x[i*2M, (i+1)*2M), real parts first, then imaginary parts.

RVec embed(const CMat& W);
void embed_into(const CMat& W, RVec& x, int offset);
CMat unembed(const RVec& x, int rows, int cols, int offset = 0);

/// Real vector r with r^T [Re w; Im w] = Re{c^H w}.
RVec re_inner(const CVec& c);
/// Real vector r with r^T [Re w; Im w] = Im{c^H w}.
RVec im_inner(const CVec& c);

}  // namespace cfisac
