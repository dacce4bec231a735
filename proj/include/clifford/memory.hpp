#pragma once

#include <cstddef>

namespace clifford::memory {

// Process-wide counters of tensor buffer allocations. Every tensor buffer in
// the library is allocated through Tensor::zeros, so the difference of two
// snapshots taken around a call is exactly what the call allocated.

struct Snapshot {
  std::size_t buffers = 0;
  std::size_t floats = 0;
};

Snapshot snapshot();
void record(std::size_t floats);

inline Snapshot operator-(Snapshot a, Snapshot b) {
  return {a.buffers - b.buffers, a.floats - b.floats};
}

}  // namespace clifford::memory
