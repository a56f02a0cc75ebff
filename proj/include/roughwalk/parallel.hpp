#pragma once

// Deterministic trial fan-out: results land in a vector indexed by trial,
// so any later reduction sees the same order no matter how many workers ran
// or how they were scheduled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

namespace roughwalk {

template <class Result, class Fn>
std::vector<Result> run_trials(int64_t trials, int workers, Fn&& fn) {
    if (trials < 0) throw std::invalid_argument("run_trials: negative trial count");
    if (workers < 1) throw std::invalid_argument("run_trials: need at least 1 worker");
    std::vector<Result> results(static_cast<size_t>(trials));
    if (trials == 0) return results;

    if (workers == 1) {
        for (int64_t t = 0; t < trials; ++t) results[static_cast<size_t>(t)] = fn(t);
        return results;
    }

    const int w = static_cast<int>(std::min<int64_t>(workers, trials));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(w));
    std::vector<std::exception_ptr> errors(static_cast<size_t>(w));
    for (int i = 0; i < w; ++i) {
        pool.emplace_back([&, i] {
            try {
                // static stride partition: worker i owns trials i, i+w, i+2w, ...
                for (int64_t t = i; t < trials; t += w) results[static_cast<size_t>(t)] = fn(t);
            } catch (...) {
                errors[static_cast<size_t>(i)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

// Compensated (Neumaier) accumulator for order-stable means.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace roughwalk
