#include "hspectra/machine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hspectra {

namespace {

[[noreturn]] void fail_invalid(const std::string& msg) {
  throw std::invalid_argument(msg);
}

// --- hashing ---------------------------------------------------------------
//
// Translation-invariant tape hash: S = sum over non-blank squares p of
// z[symbol(p)] * R^(p - head), in the ring of integers mod 2^64.  R is odd,
// so multiplying by R or by its inverse shifts every exponent by one; a
// write at the head adjusts the exponent-zero term.  z[0] = 0 keeps blanks
// invisible, matching the canonical sparse form.

constexpr std::uint64_t kHashR = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mul_inverse_pow2(std::uint64_t a) {
  std::uint64_t x = a;  // converges for odd a
  for (int i = 0; i < 6; ++i) x *= 2 - a * x;
  return x;
}
constexpr std::uint64_t kHashRInv = mul_inverse_pow2(kHashR);
static_assert(kHashR * kHashRInv == 1ull);
static_assert((kHashR & 1ull) == 1ull);

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct SymbolKeys {
  std::array<std::uint64_t, 256> z{};
  constexpr SymbolKeys() {
    z[0] = 0;
    for (std::size_t s = 1; s < z.size(); ++s) z[s] = splitmix64(0x8BADF00Dull + s) | 1ull;
  }
};
constexpr SymbolKeys kSymbolKeys{};

std::uint64_t config_key(std::uint64_t tape_hash, StateId state) {
  return splitmix64(tape_hash ^ splitmix64(0x51EDBEEFull + state));
}

// --- dense tape -------------------------------------------------------------

class DenseTape {
 public:
  void reset(std::span<const Symbol> input) {
    std::int64_t need = std::max<std::int64_t>(64, static_cast<std::int64_t>(input.size()) * 2);
    cells_.assign(static_cast<std::size_t>(2 * need), 0);
    base_ = -need;
    for (std::size_t i = 0; i < input.size(); ++i)
      cells_[static_cast<std::size_t>(static_cast<std::int64_t>(i) - base_)] = input[i];
    touched_lo_ = 0;
    touched_hi_ = input.empty() ? 0 : static_cast<std::int64_t>(input.size()) - 1;
  }

  Symbol read(std::int64_t pos) const {
    std::int64_t i = pos - base_;
    if (i < 0 || i >= static_cast<std::int64_t>(cells_.size())) return 0;
    return cells_[static_cast<std::size_t>(i)];
  }

  void write(std::int64_t pos, Symbol s) {
    ensure(pos);
    cells_[static_cast<std::size_t>(pos - base_)] = s;
    touched_lo_ = std::min(touched_lo_, pos);
    touched_hi_ = std::max(touched_hi_, pos);
  }

  void note_visit(std::int64_t pos) {
    ensure(pos);
    touched_lo_ = std::min(touched_lo_, pos);
    touched_hi_ = std::max(touched_hi_, pos);
  }

  std::int64_t touched_lo() const { return touched_lo_; }
  std::int64_t touched_hi() const { return touched_hi_; }

 private:
  void ensure(std::int64_t pos) {
    std::int64_t i = pos - base_;
    if (i >= 0 && i < static_cast<std::int64_t>(cells_.size())) return;
    std::int64_t lo = std::min(pos, base_);
    std::int64_t hi = std::max(pos + 1, base_ + static_cast<std::int64_t>(cells_.size()));
    std::int64_t span = hi - lo;
    std::int64_t new_base = lo - span;  // double with slack on both sides
    std::vector<Symbol> grown(static_cast<std::size_t>(3 * span), 0);
    std::copy(cells_.begin(), cells_.end(),
              grown.begin() + static_cast<std::ptrdiff_t>(base_ - new_base));
    cells_ = std::move(grown);
    base_ = new_base;
  }

  std::vector<Symbol> cells_;
  std::int64_t base_ = 0;
  std::int64_t touched_lo_ = 0;
  std::int64_t touched_hi_ = 0;
};

// --- visited-set with memory cap --------------------------------------------

class VisitedSet {
 public:
  static constexpr std::uint64_t kMiss = ~std::uint64_t{0};

  void reset(std::uint64_t cap) {
    cap_ = cap;
    size_ = 0;
    std::uint64_t slots = 256;
    keys_.assign(slots, 0);
    steps_.assign(slots, 0);
    mask_ = slots - 1;
  }

  bool saturated() const { return size_ >= cap_; }

  // Returns the step stored for an equal, unpoisoned key, or kMiss.  On miss
  // the key is inserted unless the entry cap has been reached.
  std::uint64_t find_or_insert(std::uint64_t key, std::uint64_t step) {
    if (cap_ == 0) return kMiss;
    if (key == 0) key = 0x1d872b41ull;  // 0 marks empty slots
    std::uint64_t i = key & mask_;
    while (true) {
      if (keys_[i] == 0) break;
      if (keys_[i] == key) {
        if (steps_[i] & kPoison) return kMiss;
        return steps_[i];
      }
      i = (i + 1) & mask_;
    }
    if (size_ >= cap_) return kMiss;
    keys_[i] = key;
    steps_[i] = step;
    ++size_;
    if (size_ * 10 >= (mask_ + 1) * 7) grow();
    return kMiss;
  }

  void poison(std::uint64_t key) {
    if (key == 0) key = 0x1d872b41ull;
    std::uint64_t i = key & mask_;
    while (keys_[i] != 0) {
      if (keys_[i] == key) {
        steps_[i] |= kPoison;
        return;
      }
      i = (i + 1) & mask_;
    }
  }

 private:
  static constexpr std::uint64_t kPoison = std::uint64_t{1} << 63;

  void grow() {
    std::uint64_t slots = (mask_ + 1) * 2;
    std::vector<std::uint64_t> keys(slots, 0), steps(slots, 0);
    std::uint64_t m = slots - 1;
    for (std::uint64_t i = 0; i <= mask_; ++i) {
      if (keys_[i] == 0) continue;
      std::uint64_t j = keys_[i] & m;
      while (keys[j] != 0) j = (j + 1) & m;
      keys[j] = keys_[i];
      steps[j] = steps_[i];
    }
    keys_ = std::move(keys);
    steps_ = std::move(steps);
    mask_ = m;
  }

  std::vector<std::uint64_t> keys_;
  std::vector<std::uint64_t> steps_;  // top bit: poisoned (hash collision seen)
  std::uint64_t mask_ = 0;
  std::uint64_t size_ = 0;
  std::uint64_t cap_ = 0;
};

// Replay without any cycle machinery; used to verify candidate repeats.
struct ReplaySnapshot {
  StateId state = 0;
  std::vector<std::pair<std::int64_t, Symbol>> cells;
};

ReplaySnapshot replay_snapshot(const DenseTape& tape, std::int64_t head, StateId state) {
  ReplaySnapshot snap;
  snap.state = state;
  for (std::int64_t p = tape.touched_lo(); p <= tape.touched_hi(); ++p) {
    Symbol s = tape.read(p);
    if (s != 0) snap.cells.emplace_back(p - head, s);
  }
  return snap;
}

bool cycle_verified(const TuringMachine& m, std::span<const Symbol> input,
                    std::uint64_t entry, std::uint64_t repeat) {
  DenseTape tape;
  tape.reset(input);
  std::int64_t head = 0;
  StateId state = 0;
  ReplaySnapshot at_entry;
  for (std::uint64_t t = 0; t <= repeat; ++t) {
    if (t == entry) at_entry = replay_snapshot(tape, head, state);
    if (t == repeat) {
      ReplaySnapshot now = replay_snapshot(tape, head, state);
      return now.state == at_entry.state && now.cells == at_entry.cells;
    }
    const Transition& tr = m.at(state, tape.read(head));
    tape.write(head, tr.write);
    head += (tr.move == Move::Right) ? 1 : -1;
    tape.note_visit(head);
    state = tr.next;
    if (state == m.stop_state()) return false;  // cannot happen for a real repeat
  }
  return false;
}

}  // namespace

// --- validation / basic semantics -------------------------------------------

void validate(const TuringMachine& m) {
  if (m.num_states < 1) fail_invalid("machine: num_states must be >= 1");
  if (m.num_symbols < 2) fail_invalid("machine: num_symbols must be >= 2");
  std::size_t expect = static_cast<std::size_t>(m.num_states) * m.num_symbols;
  if (m.transitions.size() != expect) {
    std::ostringstream os;
    os << "machine: transition table must be total (" << expect << " entries, got "
       << m.transitions.size() << ")";
    fail_invalid(os.str());
  }
  for (StateId q = 0; q < m.num_states; ++q) {
    for (std::uint32_t s = 0; s < m.num_symbols; ++s) {
      const Transition& t = m.at(q, static_cast<Symbol>(s));
      if (t.write >= m.num_symbols || t.next > m.num_states) {
        std::ostringstream os;
        os << "machine: entry (state " << q << ", symbol " << s << ") out of range";
        fail_invalid(os.str());
      }
    }
  }
}

NormalizedConfiguration normalize(const Configuration& c) {
  NormalizedConfiguration n;
  n.head_state = c.head_state;
  n.cells.reserve(c.tape.size());
  for (const auto& [pos, sym] : c.tape) n.cells.emplace_back(pos - c.head_position, sym);
  return n;
}

Configuration initial_configuration(std::span<const Symbol> input) {
  Configuration c;
  for (std::size_t i = 0; i < input.size(); ++i)
    if (input[i] != 0) c.tape.emplace(static_cast<std::int64_t>(i), input[i]);
  return c;
}

Configuration step(const TuringMachine& m, const Configuration& config) {
  validate(m);
  if (config.head_state == m.stop_state())
    fail_invalid("step: configuration is already in STOP");
  if (config.head_state > m.num_states)
    fail_invalid("step: head state out of range");
  Symbol sym = config.symbol_at(config.head_position);
  if (sym >= m.num_symbols) fail_invalid("step: tape symbol out of range");
  const Transition& t = m.at(config.head_state, sym);
  Configuration out = config;
  if (t.write == 0)
    out.tape.erase(config.head_position);
  else
    out.tape[config.head_position] = t.write;
  out.head_position += (t.move == Move::Right) ? 1 : -1;
  out.head_state = t.next;
  out.step_count += 1;
  return out;
}

// --- budgeted execution ------------------------------------------------------

RunRecord run(const TuringMachine& m, std::span<const Symbol> input,
              std::uint64_t budget, const RunOptions& options) {
  validate(m);
  if (budget < 1) fail_invalid("run: budget must be >= 1");
  for (Symbol s : input)
    if (s >= m.num_symbols) fail_invalid("run: input symbol out of range for class");

  DenseTape tape;
  tape.reset(input);
  std::int64_t head = 0;
  StateId state = 0;
  std::uint64_t t = 0;

  // Horner over ascending squares: sum of z[input[i]] * R^i with head at 0.
  std::uint64_t tape_hash = 0;
  for (std::size_t i = input.size(); i-- > 0;)
    tape_hash = tape_hash * kHashR + kSymbolKeys.z[input[i]];

  VisitedSet visited;
  bool scanning = options.detect_cycles && options.visited_cap > 0;
  bool saturated_flagged = options.detect_cycles && options.visited_cap == 0;
  if (scanning) visited.reset(options.visited_cap);

  RunRecord rec;
  auto finish_common = [&](std::uint64_t steps_executed) {
    rec.trace_length = steps_executed + 1;
    rec.cycle_scan_saturated = saturated_flagged;
  };

  if (scanning) visited.find_or_insert(config_key(tape_hash, state), 0);

  while (true) {
    if (state == m.stop_state()) {
      rec.outcome = Halted{t};
      finish_common(t);
      std::int64_t lo = tape.touched_lo(), hi = tape.touched_hi();
      while (lo <= hi && tape.read(lo) == 0) ++lo;
      while (hi >= lo && tape.read(hi) == 0) --hi;
      for (std::int64_t p = lo; p <= hi; ++p) rec.output.push_back(tape.read(p));
      return rec;
    }
    if (t == budget) {
      rec.outcome = BudgetExhausted{budget};
      finish_common(t);
      return rec;
    }

    Symbol seen = tape.read(head);
    const Transition& tr = m.at(state, seen);
    if (tr.write != seen) {
      tape.write(head, tr.write);
      tape_hash += kSymbolKeys.z[tr.write] - kSymbolKeys.z[seen];
    }
    if (tr.move == Move::Right) {
      ++head;
      tape_hash *= kHashRInv;
    } else {
      --head;
      tape_hash *= kHashR;
    }
    tape.note_visit(head);
    state = tr.next;
    ++t;

    if (scanning && state != m.stop_state()) {
      if (visited.saturated()) saturated_flagged = true;
      std::uint64_t key = config_key(tape_hash, state);
      std::uint64_t prev = visited.find_or_insert(key, t);
      if (prev != VisitedSet::kMiss) {
        if (cycle_verified(m, input, prev, t)) {
          rec.outcome = CycleCertified{prev, t - prev};
          finish_common(t);
          return rec;
        }
        visited.poison(key);
      }
    }
  }
}

std::vector<Configuration> run_trace(const TuringMachine& m,
                                     std::span<const Symbol> input,
                                     std::uint64_t budget) {
  validate(m);
  for (Symbol s : input)
    if (s >= m.num_symbols) fail_invalid("run_trace: input symbol out of range for class");
  std::vector<Configuration> trace;
  trace.push_back(initial_configuration(input));
  while (trace.back().head_state != m.stop_state() && trace.size() <= budget)
    trace.push_back(step(m, trace.back()));
  return trace;
}

std::optional<CycleCertified> detect_cycle(std::span<const Configuration> trace) {
  std::map<NormalizedConfiguration, std::uint64_t> seen;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto [it, inserted] = seen.emplace(normalize(trace[i]), i);
    if (!inserted) return CycleCertified{it->second, i - it->second};
  }
  return std::nullopt;
}

// --- Godel coding ------------------------------------------------------------

std::uint32_t code_bit_length(MachineCode c) {
  return static_cast<std::uint32_t>(std::bit_width(c.code));
}

CodeLayout code_layout(MachineClass cls) {
  if (cls.num_states < 1 || cls.num_symbols < 2)
    fail_invalid("code_layout: class needs num_states >= 1 and num_symbols >= 2");
  CodeLayout l;
  l.write_bits = static_cast<std::uint32_t>(std::bit_width(cls.num_symbols - 1));
  l.move_bits = 1;
  l.next_bits = static_cast<std::uint32_t>(std::bit_width(cls.num_states));
  l.entry_bits = l.write_bits + l.move_bits + l.next_bits;
  l.entries = cls.num_states * cls.num_symbols;
  l.total_bits = l.entry_bits * l.entries;
  if (l.total_bits > 63) {
    std::ostringstream os;
    os << "class (" << cls.num_states << "," << cls.num_symbols << ") needs "
       << l.total_bits << " code bits (> 63); count (2*k*(s+1))^(s*k) is out of range";
    throw std::overflow_error(os.str());
  }
  return l;
}

std::uint64_t class_count(MachineClass cls) {
  CodeLayout l = code_layout(cls);
  std::uint64_t base = 2ull * cls.num_symbols * (cls.num_states + 1);
  unsigned __int128 count = 1;
  for (std::uint32_t i = 0; i < l.entries; ++i) {
    count *= base;
    if (count > std::numeric_limits<std::uint64_t>::max()) {
      std::ostringstream os;
      os << "class (" << cls.num_states << "," << cls.num_symbols
         << "): count (2*k*(s+1))^(s*k) = " << base << "^" << l.entries
         << " overflows 64 bits";
      throw std::overflow_error(os.str());
    }
  }
  return static_cast<std::uint64_t>(count);
}

MachineCode encode(const TuringMachine& m) {
  validate(m);
  CodeLayout l = code_layout(m.machine_class());
  std::uint64_t code = 0;
  for (std::uint32_t e = 0; e < l.entries; ++e) {
    const Transition& t = m.transitions[e];
    std::uint64_t v = static_cast<std::uint64_t>(t.write) |
                      (static_cast<std::uint64_t>(t.move) << l.write_bits) |
                      (static_cast<std::uint64_t>(t.next) << (l.write_bits + 1));
    code |= v << (e * l.entry_bits);
  }
  return MachineCode{code};
}

TuringMachine decode(MachineCode mc, MachineClass cls) {
  CodeLayout l = code_layout(cls);
  if (l.total_bits < 64 && (mc.code >> l.total_bits) != 0) {
    std::ostringstream os;
    os << "decode: code " << mc.code << " exceeds the " << l.total_bits
       << "-bit layout of class (" << cls.num_states << "," << cls.num_symbols << ")";
    fail_invalid(os.str());
  }
  TuringMachine m;
  m.num_states = cls.num_states;
  m.num_symbols = cls.num_symbols;
  m.transitions.resize(l.entries);
  std::uint64_t entry_mask = (std::uint64_t{1} << l.entry_bits) - 1;
  std::uint64_t write_mask = (std::uint64_t{1} << l.write_bits) - 1;
  for (std::uint32_t e = 0; e < l.entries; ++e) {
    std::uint64_t v = (mc.code >> (e * l.entry_bits)) & entry_mask;
    Transition t;
    t.write = static_cast<Symbol>(v & write_mask);
    t.move = ((v >> l.write_bits) & 1) ? Move::Right : Move::Left;
    t.next = static_cast<StateId>(v >> (l.write_bits + 1));
    if (t.write >= cls.num_symbols || t.next > cls.num_states) {
      std::ostringstream os;
      os << "decode: invalid code " << mc.code << " at entry (state " << (e / cls.num_symbols)
         << ", symbol " << (e % cls.num_symbols) << ")";
      fail_invalid(os.str());
    }
    m.transitions[e] = t;
  }
  return m;
}

MachineEnumerator::MachineEnumerator(MachineClass cls) : cls_(cls) {
  layout_ = code_layout(cls);
  count_ = class_count(cls);
  entry_values_.reserve(2ull * cls.num_symbols * (cls.num_states + 1));
  for (StateId next = 0; next <= cls.num_states; ++next)
    for (std::uint32_t move = 0; move < 2; ++move)
      for (std::uint32_t write = 0; write < cls.num_symbols; ++write)
        entry_values_.push_back(static_cast<std::uint16_t>(
            write | (move << layout_.write_bits) | (next << (layout_.write_bits + 1))));
  // generated in ascending packed-value order because next owns the top bits
}

std::optional<TuringMachine> MachineEnumerator::next() {
  if (index_ >= count_) return std::nullopt;
  return machine_at(index_++);
}

TuringMachine MachineEnumerator::machine_at(std::uint64_t index) const {
  if (index >= count_) fail_invalid("enumerator: index out of range");
  TuringMachine m;
  m.num_states = cls_.num_states;
  m.num_symbols = cls_.num_symbols;
  m.transitions.resize(layout_.entries);
  std::uint64_t radix = entry_values_.size();
  std::uint32_t wb = layout_.write_bits;
  for (std::uint32_t e = 0; e < layout_.entries; ++e) {
    std::uint64_t v = entry_values_[index % radix];
    index /= radix;
    Transition t;
    t.write = static_cast<Symbol>(v & ((1u << wb) - 1));
    t.move = ((v >> wb) & 1) ? Move::Right : Move::Left;
    t.next = static_cast<StateId>(v >> (wb + 1));
    m.transitions[e] = t;
  }
  return m;
}

MachineCode MachineEnumerator::code_at(std::uint64_t index) const {
  if (index >= count_) fail_invalid("enumerator: index out of range");
  std::uint64_t code = 0;
  std::uint64_t radix = entry_values_.size();
  for (std::uint32_t e = 0; e < layout_.entries; ++e) {
    code |= static_cast<std::uint64_t>(entry_values_[index % radix]) << (e * layout_.entry_bits);
    index /= radix;
  }
  return MachineCode{code};
}

// --- symbol strings -----------------------------------------------------------

std::vector<Symbol> parse_symbols(std::string_view digits, std::uint32_t num_symbols) {
  if (num_symbols > 10)
    fail_invalid("symbol strings use digits; classes with more than 10 symbols have no text form");
  std::vector<Symbol> out;
  out.reserve(digits.size());
  for (char ch : digits) {
    if (ch < '0' || ch > '9') fail_invalid(std::string("bad symbol digit '") + ch + "'");
    Symbol s = static_cast<Symbol>(ch - '0');
    if (s >= num_symbols) fail_invalid(std::string("symbol digit '") + ch + "' out of range for class");
    out.push_back(s);
  }
  return out;
}

std::string format_symbols(std::span<const Symbol> syms) {
  std::string out;
  out.reserve(syms.size());
  for (Symbol s : syms) out.push_back(static_cast<char>('0' + s));
  return out;
}

}  // namespace hspectra
