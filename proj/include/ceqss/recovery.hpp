#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceqss/scheme.hpp"
#include "ceqss/state.hpp"

namespace ceqss {

struct GateStep {
  enum class Kind { LinearMap, CtrlAdd, Reorder };
  Kind kind = Kind::LinearMap;
  FMatrix matrix;                    // LinearMap
  std::vector<std::size_t> indices;  // LinearMap targets / Reorder permutation
  Fel alpha = 0;                     // CtrlAdd
  std::size_t control = 0, target = 0;
  std::string annotation;

  GateStep() : matrix(0, 0, FieldModulus(2)) {}
};

struct GateSchedule {
  std::vector<GateStep> steps;
  // party -> qudits it sends, ascending party order
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> communicated;
  std::vector<std::size_t> secret_out;

  std::size_t total_cost() const;
  std::vector<std::size_t> communicated_flat() const;
  std::string dump() const;
};

struct Transcript {
  std::vector<std::size_t> accessed;  // parties, ascending
  std::size_t d = 0;
  std::vector<std::pair<std::size_t, std::size_t>> qudits_received;  // party -> count
  EncodedState final_state;
  std::vector<std::size_t> secret_out;
  std::size_t communication_cost = 0;
};

// Deterministic recovery schedule for the accessed set D (0-based parties).
GateSchedule plan_recovery(const BuiltScheme& scheme, const std::vector<std::size_t>& D);

// Apply the schedule. Steps touching qudits outside the communicated set
// throw ScheduleError.
Transcript execute(const GateSchedule& schedule, const BuiltScheme& scheme,
                   const EncodedState& state, const Budgets& budgets = Budgets{});

struct RecoveryOutcome {
  SparseState secret_state;  // extracted state on the output registers
  Transcript transcript;
  GateSchedule schedule;
};

RecoveryOutcome recover(const BuiltScheme& scheme, const EncodedState& state,
                        const std::vector<std::size_t>& D, const Budgets& budgets = Budgets{});

// Worst-case cost over accessed sets of size d (all equal by symmetry; the
// enumeration asserts it).
std::size_t communication_cost(const BuiltScheme& scheme, std::size_t d);

// Reduced state on the schedule's output registers.
DensityOperator reduced_on_out(const Transcript& t, const Budgets& budgets = Budgets{});

// Encode half of a maximally entangled pair, run the recovery, and return
// the fidelity of the (reference, output) joint state with the original
// maximally entangled state.
double entangled_reference_fidelity(const BuiltScheme& scheme,
                                    const std::vector<std::size_t>& D,
                                    const Budgets& budgets = Budgets{});

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t d);

}  // namespace ceqss
