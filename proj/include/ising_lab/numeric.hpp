#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ising_lab {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Neumaier compensated summation.
template <class T>
class CompensatedSum {
public:
    void add(const T& x) {
        using std::abs;
        T t = sum_ + x;
        if (abs(sum_) >= abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

template <class R>
class CompensatedSum<std::complex<R>> {
public:
    void add(const std::complex<R>& x) {
        re_.add(x.real());
        im_.add(x.imag());
    }
    std::complex<R> value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<R> re_, im_;
};

// Runs body(i) for i in [0, count) over at most `threads` workers. Each index
// is owned by exactly one worker, so callers that write per-index results and
// reduce them afterwards in index order get the same answer for any thread count.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += threads) body(i);
        });
    for (auto& t : pool) t.join();
}

// Pairwise reduction in a fixed tree shape.
template <class T>
T tree_sum(std::vector<T> parts) {
    if (parts.empty()) return T{};
    while (parts.size() > 1) {
        std::vector<T> next((parts.size() + 1) / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = 2 * i + 1 < parts.size() ? parts[2 * i] + parts[2 * i + 1] : parts[2 * i];
        parts.swap(next);
    }
    return parts.front();
}

}  // namespace ising_lab
