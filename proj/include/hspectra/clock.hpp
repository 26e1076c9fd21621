#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hspectra/machine.hpp"

namespace hspectra {

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

/// The clock orbit of a budgeted run: one clock state per executed step plus
/// the initial state, truncated at N states.  A halting run saturates at
/// T + 1 states; anything else fills the chain to the cap.
struct ClockChain {
  std::uint64_t length = 1;
  bool halted = false;
  std::uint64_t truncation = 1;
  MachineCode source_code;
  std::vector<Symbol> source_input;
};

/// Nearest-neighbor hopping Hamiltonian over the clock states.  In this
/// project the diagonal is identically zero and every coupling is -1, so by
/// Gershgorin the whole spectrum sits in [-2, 2].
template <typename Scalar = double>
struct TridiagonalHamiltonian {
  VectorX<Scalar> diagonal;
  VectorX<Scalar> off_diagonal;  // length dimension() - 1

  Eigen::Index dimension() const { return diagonal.size(); }
};

inline ClockChain build_chain(const TuringMachine& m, std::span<const Symbol> input,
                              std::uint64_t truncation, const RunOptions& options = {}) {
  if (truncation < 1) throw std::invalid_argument("build_chain: truncation must be >= 1");
  ClockChain chain;
  chain.truncation = truncation;
  chain.source_code = encode(m);
  chain.source_input.assign(input.begin(), input.end());
  if (truncation == 1) {
    chain.length = 1;  // no step budget at all; only the initial clock state
    chain.halted = false;
    return chain;
  }
  RunRecord rec = run(m, input, truncation - 1, options);
  if (const auto* h = std::get_if<Halted>(&rec.outcome)) {
    chain.halted = true;
    chain.length = h->steps + 1;
  } else {
    chain.halted = false;
    chain.length = truncation;
  }
  return chain;
}

template <typename Scalar = double>
TridiagonalHamiltonian<Scalar> hamiltonian(const ClockChain& chain) {
  if (chain.length < 1) throw std::invalid_argument("hamiltonian: chain length must be >= 1");
  TridiagonalHamiltonian<Scalar> h;
  auto n = static_cast<Eigen::Index>(chain.length);
  h.diagonal = VectorX<Scalar>::Zero(n);
  h.off_diagonal = VectorX<Scalar>::Constant(n - 1, Scalar(-1));
  return h;
}

}  // namespace hspectra
