#pragma once

// Thin RAII layer over FFTW. Planning is serialized behind a process-wide
// mutex (the FFTW planner is not re-entrant); execution on distinct buffers is
// safe from any thread.

#include <cstddef>
#include <span>

#include "holosim/field.hpp"

namespace holosim::detail {

class FftBuffer {
public:
    FftBuffer(std::size_t rows, std::size_t cols);
    ~FftBuffer();

    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    FftBuffer(FftBuffer&& other) noexcept;
    FftBuffer& operator=(FftBuffer&& other) noexcept;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return rows_ * cols_; }

    std::span<complex> data() noexcept { return {data_, size()}; }
    std::span<const complex> data() const noexcept { return {data_, size()}; }

    complex& operator()(std::size_t col, std::size_t row) noexcept { return data_[row * cols_ + col]; }

    void fill(complex value) noexcept;

    /// Unnormalized in-place forward DFT (kernel exp(-i 2 pi k n / N)).
    void forward();
    /// Unnormalized in-place inverse DFT (kernel exp(+i 2 pi k n / N)).
    void inverse();

private:
    void transform(int sign);

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    complex* data_ = nullptr;
};

/// Signed frequency index of DFT bin m for a transform of length n
/// (numpy.fft.fftfreq ordering).
inline long signed_bin(std::size_t m, std::size_t n) noexcept {
    return m < (n + 1) / 2 ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(n);
}

} // namespace holosim::detail
