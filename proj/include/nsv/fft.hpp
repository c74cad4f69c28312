#pragma once

#include <complex>

namespace nsv::detail {

// In-place, unnormalized complex-to-complex 3d transforms on an n^3 array
// (x-fastest layout).  Plans are cached per n and created with FFTW_ESTIMATE,
// so planning is deterministic from run to run; execution on distinct arrays
// is safe from concurrent threads.
void dft_forward(int n, std::complex<double>* data);
void dft_backward(int n, std::complex<double>* data);

}  // namespace nsv::detail
