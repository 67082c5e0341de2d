#pragma once

// Denormal floats appearing in softmax tails slow SSE/AVX arithmetic down by
// an order of magnitude; flush them to zero for training workloads.

#if defined(__SSE2__)
#include <immintrin.h>
#endif

namespace scnet::nd {

inline void flush_denormals_to_zero() {
#if defined(__SSE2__)
  _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
  _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
}

}  // namespace scnet::nd
