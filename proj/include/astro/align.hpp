#pragma once

#include <cstddef>
#include <new>
#include <vector>

namespace astro {

// Cache-line alignment for buffers consumed by wide vector loads; the default
// allocator's 16-byte alignment makes 64-byte loads straddle lines.
template <typename T, std::size_t A = 64>
struct AlignedAlloc {
  using value_type = T;

  AlignedAlloc() = default;
  template <typename U>
  AlignedAlloc(const AlignedAlloc<U, A>&) noexcept {}

  template <typename U>
  struct rebind {
    using other = AlignedAlloc<U, A>;
  };

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(A)));
  }
  void deallocate(T* p, std::size_t n) noexcept {
    ::operator delete(p, n * sizeof(T), std::align_val_t(A));
  }

  template <typename U>
  bool operator==(const AlignedAlloc<U, A>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVec = std::vector<T, AlignedAlloc<T>>;

}  // namespace astro
