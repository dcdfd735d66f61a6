#pragma once

#include <cstddef>
#include <exception>

namespace itof {

/// Selects the OpenMP kernel or the serial reference loop. Both produce identical results.
enum class Exec { serial, parallel };

/// Caps the OpenMP team size; 0 leaves the runtime default.
void set_thread_limit(int threads);
int thread_limit();

/// Exceptions must not leave an OpenMP region; loop bodies run through guard() and the
/// first failure is rethrown after the loop.
class FirstError {
public:
    template <class F>
    void guard(F&& body) noexcept {
        try {
            body();
        } catch (...) {
#pragma omp critical(itof_first_error)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_;
};

}  // namespace itof
