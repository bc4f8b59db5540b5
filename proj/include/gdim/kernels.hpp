#pragma once

#include <cstddef>
#include <span>

namespace gdim::kernels {

/// Borrowed compressed-row matrix.
struct CsrView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const std::size_t> row_ptr;
  std::span<const std::size_t> col_idx;
  std::span<const double> values;
};

/// Rows per reduction chunk. Fixed so that parallel reductions sum partials
/// in the same order for every thread count.
inline constexpr std::size_t kChunkRows = 256;

// Reference implementations. Plain loops, no threading; kept for tests and the
// kernel benchmark.
namespace serial {
void spmv(const CsrView& m, std::span<const double> x, std::span<double> y);
void spmv_transpose(const CsrView& m, std::span<const double> x, std::span<double> y);
double bilinear(const CsrView& m, std::span<const double> x, std::span<const double> y);
double squared_bilinear(const CsrView& m, std::span<const double> x, std::span<const double> y);
double diagonal_quartic(const CsrView& m, std::span<const double> x);
}  // namespace serial

// OpenMP implementations. Results are bit-identical across thread counts.
namespace parallel {
void spmv(const CsrView& m, std::span<const double> x, std::span<double> y);
/// y = m^T x, computed by the caller-supplied transpose for determinism.
void spmv_transpose(const CsrView& m, std::span<const double> x, std::span<double> y);
/// x^T m y over stored entries.
double bilinear(const CsrView& m, std::span<const double> x, std::span<const double> y);
/// (x∘x)^T m (y∘y).
double squared_bilinear(const CsrView& m, std::span<const double> x, std::span<const double> y);
/// Σ_i m_ii x_i^4.
double diagonal_quartic(const CsrView& m, std::span<const double> x);
}  // namespace parallel

}  // namespace gdim::kernels
