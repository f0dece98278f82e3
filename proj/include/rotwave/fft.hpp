#pragma once

#include <fftw3.h>

#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "rotwave/field.hpp"

namespace rotwave::fft {

/// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// RAII wrapper around an in-place c2c plan over a subset of axes.
/// The plan is bound to the buffer it was created with.
class Plan {
 public:
  Plan() = default;
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  Plan(Plan&& other) noexcept : plan_(other.plan_) { other.plan_ = nullptr; }
  Plan& operator=(Plan&& other) noexcept {
    if (this != &other) {
      destroy();
      plan_ = other.plan_;
      other.plan_ = nullptr;
    }
    return *this;
  }
  ~Plan() { destroy(); }

  void execute() const { fftw_execute(plan_); }
  bool valid() const { return plan_ != nullptr; }

  static Plan make(ComplexField& f, std::span<const int> axes, int sign) {
    const Grid& g = f.grid();
    std::vector<bool> in_axes(g.dim(), false);
    for (int a : axes) {
      if (a < 0 || a >= g.dim()) throw std::invalid_argument("fft: axis out of range");
      in_axes[a] = true;
    }
    std::vector<fftw_iodim64> dims, howmany;
    for (int j = 0; j < g.dim(); ++j) {
      fftw_iodim64 d;
      d.n = g.points(j);
      d.is = static_cast<ptrdiff_t>(g.stride(j));
      d.os = d.is;
      (in_axes[j] ? dims : howmany).push_back(d);
    }
    auto* buf = reinterpret_cast<fftw_complex*>(f.data());
    Plan p;
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      p.plan_ = fftw_plan_guru64_dft(static_cast<int>(dims.size()), dims.data(),
                                     static_cast<int>(howmany.size()), howmany.data(), buf, buf,
                                     sign, FFTW_ESTIMATE);
    }
    if (!p.plan_) throw std::runtime_error("fftw_plan_guru64_dft failed");
    return p;
  }

 private:
  void destroy() {
    if (plan_) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }
  fftw_plan plan_ = nullptr;
};

inline double inverse_scale(const Grid& g, std::span<const int> axes) {
  double n = 1.0;
  for (int a : axes) n *= g.points(a);
  return 1.0 / n;
}

/// One-shot unscaled transform along `axes` (FFTW_FORWARD / FFTW_BACKWARD).
inline void transform(ComplexField& f, std::span<const int> axes, int sign) {
  Plan::make(f, axes, sign).execute();
}

inline std::vector<int> all_axes(const Grid& g) {
  std::vector<int> axes(g.dim());
  for (int j = 0; j < g.dim(); ++j) axes[j] = j;
  return axes;
}

inline void forward(ComplexField& f, std::span<const int> axes) {
  transform(f, axes, FFTW_FORWARD);
}

inline void forward(ComplexField& f) {
  auto axes = all_axes(f.grid());
  transform(f, axes, FFTW_FORWARD);
}

/// Backward transform including the 1/prod(n) normalization.
inline void backward(ComplexField& f, std::span<const int> axes) {
  transform(f, axes, FFTW_BACKWARD);
  f *= inverse_scale(f.grid(), axes);
}

inline void backward(ComplexField& f) {
  auto axes = all_axes(f.grid());
  backward(f, axes);
}

}  // namespace rotwave::fft
