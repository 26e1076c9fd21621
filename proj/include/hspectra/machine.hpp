#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hspectra {

using Symbol = std::uint8_t;
using StateId = std::uint32_t;

enum class Move : std::uint8_t { Left = 0, Right = 1 };

struct Transition {
  Symbol write = 0;
  Move move = Move::Left;
  StateId next = 0;  // value num_states denotes STOP
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// A machine class (s, k): s head states plus one distinguished stop state,
/// k tape symbols with symbol 0 acting as the blank.
struct MachineClass {
  std::uint32_t num_states = 1;
  std::uint32_t num_symbols = 2;
  friend bool operator==(const MachineClass&, const MachineClass&) = default;
};

/// Deterministic single-tape machine over a bidirectionally unbounded tape.
/// The transition table is total; entry (state, symbol) lives at index
/// state * num_symbols + symbol.
struct TuringMachine {
  std::uint32_t num_states = 1;
  std::uint32_t num_symbols = 2;
  std::vector<Transition> transitions;

  StateId stop_state() const { return num_states; }
  MachineClass machine_class() const { return {num_states, num_symbols}; }
  const Transition& at(StateId state, Symbol sym) const {
    return transitions[static_cast<std::size_t>(state) * num_symbols + sym];
  }
  Transition& at(StateId state, Symbol sym) {
    return transitions[static_cast<std::size_t>(state) * num_symbols + sym];
  }
  friend bool operator==(const TuringMachine&, const TuringMachine&) = default;
};

/// Throws std::invalid_argument unless the table is total and every
/// write/move/next field is in range for the machine's class.
void validate(const TuringMachine& m);

/// Head state, head square, sparse tape and step counter.  The tape map never
/// stores blanks; keeping the sparse form canonical is what makes
/// configuration equality (and hashing) meaningful.
struct Configuration {
  StateId head_state = 0;
  std::int64_t head_position = 0;
  std::map<std::int64_t, Symbol> tape;
  std::uint64_t step_count = 0;

  Symbol symbol_at(std::int64_t square) const {
    auto it = tape.find(square);
    return it == tape.end() ? Symbol{0} : it->second;
  }
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Translation-normalized view of a configuration: the head is shifted to
/// square 0 and tape keys move with it.  Two configurations that coincide up
/// to a rigid shift of the whole tape normalize identically.  step_count is
/// deliberately excluded.
struct NormalizedConfiguration {
  StateId head_state = 0;
  std::vector<std::pair<std::int64_t, Symbol>> cells;  // offsets from head, ascending
  friend auto operator<=>(const NormalizedConfiguration&,
                          const NormalizedConfiguration&) = default;
};

NormalizedConfiguration normalize(const Configuration& c);

/// Input written from square 0 rightward, head on square 0, state q0.
Configuration initial_configuration(std::span<const Symbol> input);

/// One transition applied to `config`.  The argument is left untouched.
/// Throws std::invalid_argument for a configuration already in STOP.
Configuration step(const TuringMachine& m, const Configuration& config);

struct Halted {
  std::uint64_t steps = 0;
  friend bool operator==(const Halted&, const Halted&) = default;
};
struct CycleCertified {
  std::uint64_t entry_step = 0;
  std::uint64_t period = 0;
  friend bool operator==(const CycleCertified&, const CycleCertified&) = default;
};
struct BudgetExhausted {
  std::uint64_t budget = 0;
  friend bool operator==(const BudgetExhausted&, const BudgetExhausted&) = default;
};

using RunOutcome = std::variant<Halted, CycleCertified, BudgetExhausted>;

struct RunRecord {
  RunOutcome outcome;
  std::uint64_t trace_length = 0;  // executed steps + 1
  std::vector<Symbol> output;      // halted runs only: leftmost..rightmost non-blank
  bool cycle_scan_saturated = false;  // visited cap hit; later repeats may go unseen
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RunOptions {
  std::uint64_t visited_cap = std::uint64_t{1} << 22;  // configurations remembered
  bool detect_cycles = true;
};

/// Budgeted execution from the standard initial configuration.  Stops at
/// STOP, at a verified configuration repeat (translation-normalized), or
/// after `budget` steps.  Absence of a cycle certificate says nothing about
/// halting.
RunRecord run(const TuringMachine& m, std::span<const Symbol> input,
              std::uint64_t budget, const RunOptions& options = {});

/// Configurations 0..min(budget, halting step), for small-scale inspection.
std::vector<Configuration> run_trace(const TuringMachine& m,
                                     std::span<const Symbol> input,
                                     std::uint64_t budget);

/// Earliest (entry_step, period) with normalized trace[entry_step] ==
/// normalized trace[entry_step + period].  Exact comparison, no hashing.
std::optional<CycleCertified> detect_cycle(std::span<const Configuration> trace);

// --- Godel coding ---------------------------------------------------------

struct MachineCode {
  std::uint64_t code = 0;
  friend auto operator<=>(const MachineCode&, const MachineCode&) = default;
};

/// Minimal binary length of the code integer; 0 for code 0.  Ordering codes
/// by (bit length, numeric value) coincides with numeric order.
std::uint32_t code_bit_length(MachineCode c);

/// Field widths of one packed transition entry and the overall layout.
/// Entry value = write | move << write_bits | next << (write_bits + 1),
/// entries concatenated in row-major (state, symbol) order with entry (0,0)
/// in the least significant bits.
struct CodeLayout {
  std::uint32_t write_bits = 0;
  std::uint32_t move_bits = 1;
  std::uint32_t next_bits = 0;
  std::uint32_t entry_bits = 0;
  std::uint32_t entries = 0;
  std::uint32_t total_bits = 0;
};

/// Throws std::overflow_error when the class does not fit a 64-bit code.
CodeLayout code_layout(MachineClass cls);

/// Number of valid machines, (2*k*(s+1))^(s*k).  Throws std::overflow_error
/// (quoting the formula) when the count or the code layout overflows.
std::uint64_t class_count(MachineClass cls);

MachineCode encode(const TuringMachine& m);

/// Throws std::invalid_argument naming the offending (state, symbol) entry
/// when a packed field is out of range for the class.
TuringMachine decode(MachineCode code, MachineClass cls);

/// Restartable ascending-code stream over every valid machine of a class.
/// Index-addressable, which is what range-sharded searches build on.
class MachineEnumerator {
 public:
  explicit MachineEnumerator(MachineClass cls);

  std::uint64_t count() const { return count_; }
  MachineClass machine_class() const { return cls_; }

  std::optional<TuringMachine> next();
  void reset() { index_ = 0; }

  TuringMachine machine_at(std::uint64_t index) const;
  MachineCode code_at(std::uint64_t index) const;

 private:
  MachineClass cls_;
  CodeLayout layout_;
  std::vector<std::uint16_t> entry_values_;  // valid packed entries, ascending
  std::uint64_t count_ = 0;
  std::uint64_t index_ = 0;
};

// --- symbol strings --------------------------------------------------------

/// Digit-string form ("1101"); text I/O supports num_symbols <= 10.
std::vector<Symbol> parse_symbols(std::string_view digits, std::uint32_t num_symbols);
std::string format_symbols(std::span<const Symbol> syms);

}  // namespace hspectra
