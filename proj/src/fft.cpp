#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <utility>

namespace holosim::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

FftBuffer::FftBuffer(std::size_t rows, std::size_t cols) : rows_{rows}, cols_{cols} {
    data_ = reinterpret_cast<complex*>(fftw_malloc(sizeof(fftw_complex) * size()));
    if (data_ == nullptr)
        throw std::bad_alloc{};
    fill(complex{});
}

FftBuffer::~FftBuffer() {
    if (data_ != nullptr)
        fftw_free(data_);
}

FftBuffer::FftBuffer(FftBuffer&& other) noexcept
    : rows_{other.rows_}, cols_{other.cols_}, data_{std::exchange(other.data_, nullptr)} {}

FftBuffer& FftBuffer::operator=(FftBuffer&& other) noexcept {
    if (this != &other) {
        if (data_ != nullptr)
            fftw_free(data_);
        rows_ = other.rows_;
        cols_ = other.cols_;
        data_ = std::exchange(other.data_, nullptr);
    }
    return *this;
}

void FftBuffer::fill(complex value) noexcept { std::fill(data_, data_ + size(), value); }

void FftBuffer::forward() { transform(FFTW_FORWARD); }
void FftBuffer::inverse() { transform(FFTW_BACKWARD); }

void FftBuffer::transform(int sign) {
    auto* io = reinterpret_cast<fftw_complex*>(data_);
    fftw_plan plan;
    {
        std::lock_guard lock{planner_mutex()};
        plan = fftw_plan_dft_2d(static_cast<int>(rows_), static_cast<int>(cols_), io, io, sign,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock{planner_mutex()};
    fftw_destroy_plan(plan);
}

} // namespace holosim::detail
