"""Brute-force finite-horizon POMDP semantics over ground action theories.

States are complete consistent frozensets of literals.  All probability and
reward arithmetic is exact (`Fraction`); decimals appear only at serialization
boundaries.  This module is the ground truth the logic-programming pipeline is
checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .theory import (
    ActionDecl, ActionTheory, SubOutcome, TOLERANCE,
    close_initial_formula, fluent_of, is_consistent, negate, render_formula,
)


class OracleError(Exception):
    pass


State = frozenset


def render_state(state: State) -> str:
    return ",".join(sorted(state))


def state_key(state: State) -> tuple[str, ...]:
    return tuple(sorted(state))


def check_state(theory: ActionTheory, state: State):
    if not is_consistent(state):
        raise OracleError(f"inconsistent state {render_formula(state)}")
    if {fluent_of(l) for l in state} != set(theory.fluents):
        raise OracleError(f"incomplete state {render_formula(state)}")


@dataclass(frozen=True)
class Trajectory:
    """Alternating state / sub-outcome sequence with per-step probs and rewards."""
    states: tuple[State, ...]
    subs: tuple[str, ...]
    probs: tuple[Fraction, ...]
    rewards: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.subs)
        if not (len(self.states) == n + 1 == len(self.probs) + 1 == len(self.rewards) + 1):
            raise OracleError("inconsistent trajectory lengths")

    def to_json(self) -> dict:
        steps: list = [sorted(self.states[0])]
        for sub, s in zip(self.subs, self.states[1:]):
            steps.append(sub)
            steps.append(sorted(s))
        return {
            "trajectory": steps,
            "probs": [float(p) for p in self.probs],
            "rewards": [float(r) for r in self.rewards],
        }


Policy = Mapping[State, str]


def policy_to_json(policy: Policy) -> list[dict]:
    return [
        {"state": sorted(s), "action": policy[s]}
        for s in sorted(policy, key=state_key)
    ]


def policy_sort_key(policy: Policy) -> tuple:
    return tuple(sorted((state_key(s), a) for s, a in policy.items()))


# ---------------------------------------------------------------------------
# initial states and transitions


def initial_states(theory: ActionTheory) -> list[tuple[State, Fraction]]:
    """One closed complete state per initial-belief entry, with its probability."""
    out = []
    for entry in theory.initial:
        closed = close_initial_formula(theory, entry.formula)
        if not is_consistent(closed):
            raise OracleError(
                f"closure of {render_formula(entry.formula)} is inconsistent")
        if {fluent_of(l) for l in closed} != set(theory.fluents):
            raise OracleError(
                f"closure of {render_formula(entry.formula)} yields an incomplete state")
        out.append((frozenset(closed), entry.prob))
    return out


def is_executable(theory: ActionTheory, state: State, action: ActionDecl) -> bool:
    return action.executability <= state


def transition(sub: SubOutcome, state: State) -> State:
    """Effect literals asserted, complements removed, everything else inertial."""
    if not (sub.condition <= state):
        raise OracleError(f"condition of {sub.id} does not hold in {render_formula(state)}")
    dropped = {negate(l) for l in sub.effect}
    return frozenset((state - dropped) | sub.effect)


def successors(theory: ActionTheory, state: State, action: ActionDecl,
               ) -> list[tuple[SubOutcome, State, Fraction, Fraction]]:
    """Applicable sub-outcomes with successor state, probability, and reward."""
    if not is_executable(theory, state, action):
        raise OracleError(f"action {action.name} not executable in {render_formula(state)}")
    out = []
    for sub in action.outcomes:
        if sub.condition <= state:
            out.append((sub, transition(sub, state), sub.prob, sub.reward))
    return out


# ---------------------------------------------------------------------------
# trajectories and values


def _policy_action(theory: ActionTheory, policy: Policy, state: State) -> ActionDecl:
    try:
        name = policy[state]
    except KeyError:
        raise OracleError(f"policy undefined at state {render_formula(state)}") from None
    action = theory.action(name)
    if not is_executable(theory, state, action):
        raise OracleError(f"policy assigns non-executable {name} at {render_formula(state)}")
    return action


def _extend(theory: ActionTheory, policy: Policy, traj: Trajectory, depth: int,
            ) -> Iterator[Trajectory]:
    if depth == 0:
        yield traj
        return
    state = traj.states[-1]
    action = _policy_action(theory, policy, state)
    for sub, nxt, p, r in successors(theory, state, action):
        if p == 0:
            continue
        yield from _extend(
            theory, policy,
            Trajectory(traj.states + (nxt,), traj.subs + (sub.id,),
                       traj.probs + (p,), traj.rewards + (r,)),
            depth - 1)


def enumerate_trajectories(theory: ActionTheory, policy: Policy, horizon: int,
                           ) -> list[Trajectory]:
    """All horizon-step trajectories from every positive-probability initial state."""
    if horizon < 0:
        raise OracleError("horizon must be non-negative")
    out = []
    for s0, p0 in initial_states(theory):
        if p0 == 0:
            continue
        out.extend(_extend(theory, policy, Trajectory((s0,), (), (), ()), horizon))
    return out


def trajectory_sum_value(theory: ActionTheory, policy: Policy, horizon: int,
                         s0: State) -> Fraction:
    """Per-trajectory discounted sum: each time-t term weighted by its prefix
    probability, summed over all full-length trajectories from s0."""
    if s0 not in {s for s, _ in initial_states(theory)}:
        raise OracleError(f"{render_formula(s0)} is not an initial state")
    total = Fraction(0)
    for traj in _extend(theory, policy, Trajectory((s0,), (), (), ()), horizon):
        prefix = Fraction(1)
        for t in range(horizon):
            prefix *= traj.probs[t]
            total += theory.discount ** t * prefix * traj.rewards[t]
    return total


def recursive_value(theory: ActionTheory, policy: Policy, horizon: int,
                    s0: State) -> Fraction:
    """One-step expectation recursion, splitting sensing from non-sensing steps."""
    check_state(theory, s0)

    def value(state: State, n: int) -> Fraction:
        if n == 0:
            return Fraction(0)
        action = _policy_action(theory, policy, state)
        total = Fraction(0)
        for _, nxt, p, r in successors(theory, state, action):
            total += p * (r + theory.discount * value(nxt, n - 1))
        return total

    return value(s0, horizon)


def belief_value(theory: ActionTheory, policy: Policy, horizon: int,
                 belief: Mapping[State, Fraction]) -> Fraction:
    """Belief-weighted trajectory-sum value."""
    mass = sum(belief.values(), Fraction(0))
    if abs(mass - 1) > TOLERANCE:
        raise OracleError(f"belief is not normalized (mass {mass})")
    total = Fraction(0)
    for state, weight in belief.items():
        if weight == 0:
            continue
        total += weight * trajectory_sum_value(theory, policy, horizon, state)
    return total


def initial_belief(theory: ActionTheory) -> dict[State, Fraction]:
    belief: dict[State, Fraction] = {}
    for s, p in initial_states(theory):
        belief[s] = belief.get(s, Fraction(0)) + p
    return belief


def belief_update(theory: ActionTheory, belief: Mapping[State, Fraction],
                  action_name: str) -> dict[State, Fraction]:
    """Push the belief through one action's transition/observation distribution."""
    action = theory.action(action_name)
    masses: dict[State, Fraction] = {}
    for state, weight in belief.items():
        if weight == 0:
            continue
        for _, nxt, p, _ in successors(theory, state, action):
            masses[nxt] = masses.get(nxt, Fraction(0)) + p * weight
    total = sum(masses.values(), Fraction(0))
    if total == 0:
        raise OracleError(f"no successor reachable under {action_name}")
    return {s: m / total for s, m in masses.items() if m > 0}


# ---------------------------------------------------------------------------
# policy space


def reachable_states(theory: ActionTheory, horizon: int) -> list[State]:
    """States reachable at decision times 0..horizon-1 under any action choice."""
    frontier = {s for s, p in initial_states(theory) if p > 0}
    seen = set(frontier)
    for _ in range(max(horizon - 1, 0)):
        nxt = set()
        for state in frontier:
            for action in theory.actions:
                if not is_executable(theory, state, action):
                    continue
                for _, succ, p, _ in successors(theory, state, action):
                    if p > 0 and succ not in seen:
                        nxt.add(succ)
        seen |= nxt
        frontier = nxt
        if not frontier:
            break
    return sorted(seen, key=state_key)


def enumerate_policies(theory: ActionTheory, horizon: int) -> list[dict[State, str]]:
    """All maps from reachable states to executable actions, in lexicographic order."""
    states = reachable_states(theory, horizon)
    choices = []
    for state in states:
        names = [a.name for a in theory.actions if is_executable(theory, state, a)]
        if not names:
            raise OracleError(f"no executable action in {render_formula(state)}")
        choices.append(sorted(names))
    return [dict(zip(states, combo)) for combo in itertools.product(*choices)]


def optimal_policy(theory: ActionTheory, horizon: int) -> tuple[dict[State, str], Fraction]:
    """Argmax of the belief-weighted value; ties broken lexicographically."""
    belief = initial_belief(theory)
    best: tuple[dict, Fraction] | None = None
    for policy in enumerate_policies(theory, horizon):
        value = belief_value(theory, policy, horizon, belief)
        if best is None or value > best[1] or (
                value == best[1] and policy_sort_key(policy) < policy_sort_key(best[0])):
            best = (policy, value)
    if best is None:
        raise OracleError("no policies to evaluate")
    return best
