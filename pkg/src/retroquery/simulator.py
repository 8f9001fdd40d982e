"""Block-diagonal circuit simulation over setting x argument x check registers.

A state is a classical mixture over setting labels b; each label carries a
pure amplitude vector on A (the argument register) tensor V (one check
qubit).  Gates act identically on every block except the oracle query,
which reads the block's own table.  Nothing here ever builds a dense
unitary; blocks are reshaped and updated in place, so the test suite can
cross-check against an explicit matrix route.

Block vector layout: index = (argument value as integer, most significant
bit first) * 2 + v.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    SizeError,
    UnknownCircuit,
    ValidationError,
    ZeroProbabilityOutcome,
)
from .feedback import DEFAULT_CONFIG, FeedbackConfig, KnowledgeInstance, all_instances
from .observables import Partition, partition_from_classes
from .problems import OracleProblem, gen_deutsch, gen_deutsch_jozsa, gen_grover, gen_simon
from .retro_model import auto_strategy

SIM_MAX_ARG_BITS = 8
MAX_HISTORIES = 200_000
BUILTIN_CIRCUITS = ("deutsch", "grover2", "dj2", "simon2")

_RT2 = 1.0 / math.sqrt(2.0)
_H1 = np.array([[_RT2, _RT2], [_RT2, -_RT2]], dtype=complex)
_EPS = 1e-12


# === gates ===

@dataclass(frozen=True)
class Gate:
    """One circuit step.  kind is H_A, U_f, INV_A, PERM_A or U_B."""

    kind: str
    perm: tuple[tuple[str, str], ...] | None = None


def _canonical_perm(mapping: dict[str, str], what: str) -> tuple[tuple[str, str], ...]:
    if set(mapping.keys()) != set(mapping.values()):
        raise ValidationError(f"{what} permutation must be a bijection on its domain")
    return tuple(sorted(mapping.items()))


def hadamard_a() -> Gate:
    return Gate("H_A")


def oracle_query() -> Gate:
    return Gate("U_f")


def invert_about_mean() -> Gate:
    return Gate("INV_A")


def permute_a(mapping: dict[str, str]) -> Gate:
    return Gate("PERM_A", _canonical_perm(mapping, "argument"))


def permute_settings(mapping: dict[str, str]) -> Gate:
    return Gate("U_B", _canonical_perm(mapping, "setting"))


# === states ===

@dataclass
class BlockState:
    """Mixture weights plus one unit (or zero) amplitude vector per setting."""

    problem: OracleProblem
    blocks: dict[str, np.ndarray]
    weights: dict[str, float]

    def copy(self) -> "BlockState":
        return BlockState(
            problem=self.problem,
            blocks={b: v.copy() for b, v in self.blocks.items()},
            weights=dict(self.weights),
        )


def input_state(problem: OracleProblem) -> BlockState:
    """Every setting equally weighted, A at zero, V in the minus state."""
    if problem.arg_bits > SIM_MAX_ARG_BITS:
        raise SizeError(
            f"simulation limited to {SIM_MAX_ARG_BITS} argument bits, "
            f"got {problem.arg_bits}"
        )
    dim = 2 ** problem.arg_bits * 2
    c = len(problem.settings)
    blocks = {}
    for b in problem.setting_labels:
        vec = np.zeros(dim, dtype=complex)
        vec[0] = _RT2
        vec[1] = -_RT2
        blocks[b] = vec
    return BlockState(problem, blocks, {b: 1.0 / c for b in problem.setting_labels})


def _apply_block_gate(problem: OracleProblem, gate: Gate, b: str, vec: np.ndarray) -> np.ndarray:
    n = problem.arg_bits
    if gate.kind == "H_A":
        t = vec.reshape((2,) * n + (2,))
        for axis in range(n):
            t = np.moveaxis(np.tensordot(_H1, t, axes=([1], [axis])), 0, axis)
        return np.ascontiguousarray(t).reshape(-1)
    if gate.kind == "U_f":
        if problem.out_bits != 1:
            raise DimensionMismatch(
                f"oracle query needs one-bit table values, got {problem.out_bits}"
            )
        table = problem.setting(b).table
        t = vec.reshape(-1, 2).copy()
        for i, a in enumerate(problem.arguments):
            if table[a] == "1":
                t[i] = t[i, ::-1]
        return t.reshape(-1)
    if gate.kind == "INV_A":
        t = vec.reshape(-1, 2)
        return (2.0 * t.mean(axis=0) - t).reshape(-1)
    if gate.kind == "PERM_A":
        mapping = dict(gate.perm)
        extra = set(mapping) - set(problem.arguments)
        if extra:
            raise ValidationError(f"argument permutation mentions unknown values {sorted(extra)}")
        index = {a: i for i, a in enumerate(problem.arguments)}
        t = vec.reshape(-1, 2)
        out = np.zeros_like(t)
        for a, i in index.items():
            out[index[mapping.get(a, a)]] = t[i]
        return out.reshape(-1)
    raise UnknownCircuit(f"unknown gate kind {gate.kind!r}")


def apply(state: BlockState, gates) -> BlockState:
    """Run gates left to right; returns a new state."""
    if isinstance(gates, Gate):
        gates = [gates]
    problem = state.problem
    blocks = {b: v.copy() for b, v in state.blocks.items()}
    weights = dict(state.weights)
    for gate in gates:
        if gate.kind == "U_B":
            mapping = dict(gate.perm)
            if set(mapping) != set(problem.setting_labels):
                raise ValidationError("setting permutation must cover every setting label")
            blocks = {mapping[b]: v for b, v in blocks.items()}
            weights = {mapping[b]: w for b, w in weights.items()}
        else:
            blocks = {b: _apply_block_gate(problem, gate, b, v) for b, v in blocks.items()}
    return BlockState(problem, blocks, weights)


# === measurements ===

def complete_b_partition(problem: OracleProblem) -> Partition:
    return partition_from_classes(problem, [[b] for b in problem.setting_labels])


def complete_a_partition(problem: OracleProblem) -> tuple[tuple[str, ...], ...]:
    return tuple((a,) for a in problem.arguments)


def _canonical_a_classes(problem, classes) -> tuple[tuple[str, ...], ...]:
    canon = tuple(sorted(tuple(sorted(set(cls))) for cls in classes))
    flat = [a for cls in canon for a in cls]
    if sorted(flat) != sorted(problem.arguments) or len(flat) != len(set(flat)):
        raise ValidationError("argument classes must partition the argument values")
    return canon


def _a_class_probability(state: BlockState, cls: tuple[str, ...]) -> float:
    index = {a: i for i, a in enumerate(state.problem.arguments)}
    rows = [index[a] for a in cls]
    total = 0.0
    for b, vec in state.blocks.items():
        t = vec.reshape(-1, 2)
        total += state.weights[b] * float(np.sum(np.abs(t[rows]) ** 2))
    return total


def _pick(classes, probs, outcome, rng):
    if outcome is not None:
        want = tuple(sorted(outcome))
        if want not in classes:
            raise ValidationError(f"outcome {want} is not a class of this partition")
        if probs[classes.index(want)] <= _EPS:
            raise ZeroProbabilityOutcome(f"outcome {want} has zero probability")
        return want
    rng = rng or random.Random(0)
    x = rng.random() * sum(probs)
    acc = 0.0
    for cls, p in zip(classes, probs):
        acc += p
        if x <= acc and p > _EPS:
            return cls
    return next(cls for cls, p in reversed(list(zip(classes, probs))) if p > _EPS)


def measure_partition(
    state: BlockState,
    register: str,
    partition,
    outcome=None,
    rng: random.Random | None = None,
):
    """Project onto one class of a partial observable.

    register "B" takes a setting Partition, register "A" a sequence of
    argument classes.  With outcome=None a class is sampled from rng
    (seeded Random(0) when omitted).  Returns (class, new state).
    """
    problem = state.problem
    if register == "B":
        if partition.classes and not set(partition.classes[0]) <= set(problem.setting_labels):
            raise ValidationError("partition belongs to a different problem")
        classes = list(partition.classes)
        probs = [sum(state.weights.get(b, 0.0) for b in cls) for cls in classes]
        chosen = _pick(classes, probs, outcome, rng)
        p = probs[classes.index(chosen)]
        new = state.copy()
        for b in problem.setting_labels:
            if b in chosen:
                new.weights[b] = state.weights[b] / p
            else:
                new.weights[b] = 0.0
                new.blocks[b] = np.zeros_like(new.blocks[b])
        return chosen, new
    if register == "A":
        classes = list(_canonical_a_classes(problem, partition))
        probs = [_a_class_probability(state, cls) for cls in classes]
        chosen = _pick(classes, probs, outcome, rng)
        p = probs[classes.index(chosen)]
        index = {a: i for i, a in enumerate(problem.arguments)}
        keep = {index[a] for a in chosen}
        new = state.copy()
        for b in problem.setting_labels:
            t = new.blocks[b].reshape(-1, 2)
            for i in range(t.shape[0]):
                if i not in keep:
                    t[i] = 0.0
            norm2 = float(np.sum(np.abs(t) ** 2))
            if norm2 > _EPS:
                t /= math.sqrt(norm2)
                new.weights[b] = state.weights[b] * norm2 / p
            else:
                t[:] = 0.0  # dead blocks stay exactly dead
                new.weights[b] = 0.0
            new.blocks[b] = t.reshape(-1)
        return chosen, new
    raise ValidationError(f"register must be 'A' or 'B', got {register!r}")


def propagate_projection(
    state_before: BlockState,
    gates,
    partition: Partition,
    outcome,
    direction: str,
) -> BlockState:
    """Move a setting projection through a circuit.

    The projection "outcome in this class of partition" is stated at the
    circuit's output end.  backward returns the matching input-end state,
    forward the output-end state.  Setting permutations inside the circuit
    transport the class; everything else commutes with it untouched.
    """
    if direction not in ("forward", "backward"):
        raise ValidationError(f"direction must be forward or backward, got {direction!r}")
    if isinstance(gates, Gate):
        gates = [gates]
    after = apply(state_before, gates)
    chosen, projected_after = measure_partition(after, "B", partition, outcome)

    members = set(chosen)
    for gate in reversed(gates):
        if gate.kind == "U_B":
            inverse = {v: k for k, v in dict(gate.perm).items()}
            members = {inverse[m] for m in members}
    rest = sorted(set(state_before.problem.setting_labels) - members)
    classes = [sorted(members)] + ([rest] if rest else [])
    moved = partition_from_classes(state_before.problem, classes)
    _, projected_before = measure_partition(
        state_before, "B", moved, tuple(sorted(members))
    )

    # sanity: projecting first and evolving must agree with evolving first
    err = block_distance(apply(projected_before, gates), projected_after, quotient_phase=False)
    if err > 1e-12:
        raise ValidationError(f"projection failed to commute with the circuit (err={err:.3e})")
    return projected_before if direction == "backward" else projected_after


# === diagnostics ===

def entropy_of(state: BlockState, register: str) -> float:
    """Shannon entropy of the setting mixture, or von Neumann entropy of A."""
    if register == "B":
        return -sum(w * math.log2(w) for w in state.weights.values() if w > 1e-15)
    if register == "A":
        dim = 2 ** state.problem.arg_bits
        rho = np.zeros((dim, dim), dtype=complex)
        for b, vec in state.blocks.items():
            w = state.weights[b]
            if w <= 1e-15:
                continue
            m = vec.reshape(-1, 2)
            rho += w * (m @ m.conj().T)
        eig = np.linalg.eigvalsh(rho)
        return float(-sum(x * math.log2(x) for x in eig if x > 1e-15))
    raise ValidationError(f"register must be 'A' or 'B', got {register!r}")


def block_distance(s1: BlockState, s2: BlockState, quotient_phase: bool = True) -> float:
    """Max per-block deviation: weights plus amplitude vectors.

    With quotient_phase each block of s2 may differ by a global phase;
    block weights are always compared directly.
    """
    worst = 0.0
    for b in set(s1.blocks) | set(s2.blocks):
        v1 = s1.blocks.get(b)
        v2 = s2.blocks.get(b)
        zero = np.zeros_like(v1 if v1 is not None else v2)
        v1 = zero if v1 is None else v1
        v2 = zero if v2 is None else v2
        worst = max(worst, abs(s1.weights.get(b, 0.0) - s2.weights.get(b, 0.0)))
        n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
        if n1 < 1e-13 and n2 < 1e-13:
            continue
        if min(n1, n2) < 1e-13:
            worst = max(worst, float(max(n1, n2)))
            continue
        if quotient_phase:
            k = int(np.argmax(np.abs(v1)))
            if abs(v2[k]) < 1e-13:
                worst = max(worst, 2.0)
                continue
            phase = (v2[k] / abs(v2[k])) * (v1[k].conjugate() / abs(v1[k]))
            v1 = v1 * phase
        worst = max(worst, float(np.max(np.abs(v1 - v2))))
    return worst


def sharp_argument(state: BlockState, b: str) -> str | None:
    """The argument value a block points at, if its A-marginal is sharp."""
    vec = state.blocks[b]
    t = np.abs(vec.reshape(-1, 2)) ** 2
    p = t.sum(axis=1)
    total = p.sum()
    if total < 1e-13:
        return None
    p = p / total
    i = int(np.argmax(p))
    return state.problem.arguments[i] if p[i] > 1.0 - 1e-9 else None


# === histories ===

@dataclass(frozen=True)
class History:
    """One Feynman path through a circuit inside a fixed setting block.

    states holds (b, a, v) before the first gate and after each gate;
    amplitudes holds the start amplitude then one factor per gate;
    queries lists the argument sent to the oracle at each query gate.
    """

    b: str
    states: tuple[tuple[str, str, int], ...]
    amplitudes: tuple[complex, ...]
    amplitude: complex
    queries: tuple[str, ...]


def _successors(problem: OracleProblem, gate: Gate, b: str, a: str, v: int):
    args = problem.arguments
    if gate.kind == "H_A":
        ai = int(a, 2)
        scale = _RT2 ** problem.arg_bits
        out = []
        for a2 in args:
            sign = -1.0 if bin(ai & int(a2, 2)).count("1") % 2 else 1.0
            out.append((a2, v, sign * scale))
        return out
    if gate.kind == "U_f":
        if problem.out_bits != 1:
            raise DimensionMismatch(
                f"oracle query needs one-bit table values, got {problem.out_bits}"
            )
        flip = problem.setting(b).table[a] == "1"
        return [(a, v ^ int(flip), 1.0)]
    if gate.kind == "INV_A":
        n = 2 ** problem.arg_bits
        out = []
        for a2 in args:
            amp = 2.0 / n - (1.0 if a2 == a else 0.0)
            if abs(amp) > 1e-15:
                out.append((a2, v, amp))
        return out
    if gate.kind == "PERM_A":
        mapping = dict(gate.perm)
        return [(mapping.get(a, a), v, 1.0)]
    raise UnknownCircuit(f"unknown gate kind {gate.kind!r}")


def enumerate_histories(problem: OracleProblem, gates, b: str) -> list[History]:
    """Every nonzero path from the input state through gates, inside block b."""
    if isinstance(gates, Gate):
        gates = [gates]
    problem.setting(b)
    if any(g.kind == "U_B" for g in gates):
        raise ValidationError("history enumeration needs a fixed setting label")
    a0 = "0" * problem.arg_bits
    histories: list[History] = []

    def walk(step, a, v, states, amps, queries):
        if len(histories) > MAX_HISTORIES:
            raise SizeError(f"more than {MAX_HISTORIES} histories")
        if step == len(gates):
            total = amps[0]
            for x in amps[1:]:
                total *= x
            histories.append(
                History(
                    b=b,
                    states=tuple(states),
                    amplitudes=tuple(amps),
                    amplitude=total,
                    queries=tuple(queries),
                )
            )
            return
        gate = gates[step]
        for a2, v2, amp in _successors(problem, gate, b, a, v):
            walk(
                step + 1,
                a2,
                v2,
                states + [(b, a2, v2)],
                amps + [amp],
                queries + ([a] if gate.kind == "U_f" else []),
            )

    for v0, amp0 in ((0, _RT2), (1, -_RT2)):
        walk(0, a0, v0, [(b, a0, v0)], [amp0], [])
    return histories


def classify_history(
    problem: OracleProblem,
    history: History,
    config: FeedbackConfig | None = None,
    strategy: str | None = None,
) -> list[KnowledgeInstance]:
    """Knowledge instances at history.b consistent with what the path queried.

    An instance justifies the path when, among its settings, agreeing with
    the true one on every queried argument pins down the solution.
    """
    config = config or DEFAULT_CONFIG
    strategy = strategy or auto_strategy(problem)
    out = []
    for inst in all_instances(problem, history.b, config, strategy):
        groups: dict[tuple[str, ...], set[str]] = {}
        for m in inst.subset:
            st = problem.setting(m)
            key = tuple(st.table[q] for q in history.queries)
            groups.setdefault(key, set()).add(st.solution)
        if all(len(sols) == 1 for sols in groups.values()):
            out.append(inst)
    return out


# === builtin circuits ===

@dataclass(frozen=True)
class BuiltinCircuit:
    name: str
    problem: OracleProblem
    gates: tuple[Gate, ...]


def builtin_circuit(name: str) -> BuiltinCircuit:
    if name == "deutsch":
        return BuiltinCircuit(name, gen_deutsch(), (hadamard_a(), oracle_query(), hadamard_a()))
    if name == "grover2":
        return BuiltinCircuit(
            name, gen_grover(2), (hadamard_a(), oracle_query(), invert_about_mean())
        )
    if name == "dj2":
        return BuiltinCircuit(
            name, gen_deutsch_jozsa(2), (hadamard_a(), oracle_query(), hadamard_a())
        )
    if name == "simon2":
        return BuiltinCircuit(
            name,
            gen_simon(2),
            (hadamard_a(), oracle_query(), hadamard_a(), permute_a({"01": "10", "10": "01"})),
        )
    raise UnknownCircuit(f"no builtin circuit named {name!r}; know {BUILTIN_CIRCUITS}")


# === bundled reference checks ===

@dataclass(frozen=True)
class StateCheck:
    label: str
    passed: bool
    max_err: float


def _expected_state(problem: OracleProblem, wanted: dict[str, tuple[float, str]]) -> BlockState:
    """Blocks with sharp argument content and the V minus state."""
    dim = 2 ** problem.arg_bits * 2
    blocks = {}
    weights = {}
    index = {a: i for i, a in enumerate(problem.arguments)}
    for b in problem.setting_labels:
        vec = np.zeros(dim, dtype=complex)
        if b in wanted:
            w, a = wanted[b]
            vec[index[a] * 2] = _RT2
            vec[index[a] * 2 + 1] = -_RT2
        else:
            w = 0.0
        blocks[b] = vec
        weights[b] = w
    return BlockState(problem, blocks, weights)


def _check(label: str, err: float, tol: float = 1e-12) -> StateCheck:
    return StateCheck(label=label, passed=err <= tol, max_err=float(err))


def _entropy_check(label: str, state: BlockState, register: str, want: float) -> StateCheck:
    return _check(label, abs(entropy_of(state, register) - want))


def _deutsch_checks() -> list[StateCheck]:
    bi = builtin_circuit("deutsch")
    prob, gates = bi.problem, bi.gates
    inp = input_state(prob)
    out = apply(inp, gates)
    whole = {b: (0.25, "0") for b in prob.setting_labels}
    checks = [
        _check("input-uniform", block_distance(inp, _expected_state(prob, whole))),
        _check(
            "output-contents",
            block_distance(
                out,
                _expected_state(
                    prob, {"00": (0.25, "0"), "01": (0.25, "1"), "10": (0.25, "1"), "11": (0.25, "0")}
                ),
            ),
        ),
        _entropy_check("input-setting-entropy", inp, "B", 2.0),
        _entropy_check("output-argument-entropy", out, "A", 1.0),
    ]

    a_part = complete_a_partition(prob)
    b_part = complete_b_partition(prob)
    _, alice = measure_partition(out, "A", a_part, ("1",))
    checks.append(
        _check(
            "argument-forced",
            block_distance(alice, _expected_state(prob, {"01": (0.5, "1"), "10": (0.5, "1")})),
        )
    )
    _, outb = measure_partition(alice, "B", b_part, ("01",))
    checks.append(
        _check(
            "setting-after-argument",
            block_distance(outb, _expected_state(prob, {"01": (1.0, "1")})),
        )
    )
    _, b_first = measure_partition(out, "B", b_part, ("01",))
    _, swapped = measure_partition(b_first, "A", a_part, ("1",))
    checks.append(_check("projection-order-invariance", block_distance(outb, swapped)))
    checks.append(_entropy_check("forced-setting-entropy", outb, "B", 0.0))

    low_bit = partition_from_classes(prob, [["00", "10"], ["01", "11"]])
    _, co = measure_partition(out, "B", low_bit, ("01", "11"))
    checks.append(
        _check(
            "low-bit-forced",
            block_distance(co, _expected_state(prob, {"01": (0.5, "1"), "11": (0.5, "0")})),
        )
    )
    adv = propagate_projection(inp, gates, low_bit, ("01", "11"), "backward")
    checks.append(
        _check(
            "backward-low-bit",
            block_distance(adv, _expected_state(prob, {"01": (0.5, "0"), "11": (0.5, "0")})),
        )
    )
    flip = {"00": "11", "01": "10", "10": "01", "11": "00"}
    mo = propagate_projection(
        inp, [permute_settings(flip)] + list(gates), low_bit, ("01", "11"), "backward"
    )
    checks.append(
        _check(
            "backward-past-relabel",
            block_distance(mo, _expected_state(prob, {"00": (0.5, "0"), "10": (0.5, "0")})),
        )
    )
    high_bit = partition_from_classes(prob, [["00", "01"], ["10", "11"]])
    _, dino = measure_partition(mo, "B", high_bit, ("10", "11"))
    checks.append(
        _check(
            "high-bit-after-backward",
            block_distance(dino, _expected_state(prob, {"10": (1.0, "0")})),
        )
    )

    _, pro = measure_partition(inp, "B", b_part, ("10",))
    checks.append(
        _check("forced-setting-input", block_distance(pro, _expected_state(prob, {"10": (1.0, "0")})))
    )
    inbob = apply(pro, [permute_settings(flip)])
    checks.append(
        _check("relabeled-input", block_distance(inbob, _expected_state(prob, {"01": (1.0, "0")})))
    )
    outbob = apply(inbob, gates)
    checks.append(
        _check("relabeled-output", block_distance(outbob, _expected_state(prob, {"01": (1.0, "1")})))
    )
    return checks


def _content_checks(name: str, contents: dict[str, str], a_entropy: float) -> list[StateCheck]:
    bi = builtin_circuit(name)
    prob = bi.problem
    inp = input_state(prob)
    out = apply(inp, bi.gates)
    c = len(prob.settings)
    wanted = {b: (1.0 / c, a) for b, a in contents.items()}
    return [
        _check("input-uniform", block_distance(inp, _expected_state(prob, {b: (1.0 / c, "0" * prob.arg_bits) for b in prob.setting_labels}))),
        _check("output-contents", block_distance(out, _expected_state(prob, wanted))),
        _entropy_check("input-setting-entropy", inp, "B", math.log2(c)),
        _entropy_check("output-argument-entropy", out, "A", a_entropy),
    ]


def check_states(name: str) -> list[StateCheck]:
    """Frozen reference checks for a builtin circuit, all expected to pass."""
    if name == "deutsch":
        return _deutsch_checks()
    if name == "grover2":
        prob = builtin_circuit(name).problem
        return _content_checks(name, {b: b for b in prob.setting_labels}, 2.0)
    if name == "dj2":
        contents = {
            "0000": "00", "1111": "00",
            "0011": "10", "1100": "10",
            "0101": "01", "1010": "01",
            "0110": "11", "1001": "11",
        }
        return _content_checks(name, contents, 2.0)
    if name == "simon2":
        prob = builtin_circuit(name).problem
        contents = {s.b: prob.meta.period[s.b] for s in prob.settings}
        return _content_checks(name, contents, math.log2(3.0))
    raise UnknownCircuit(f"no builtin circuit named {name!r}; know {BUILTIN_CIRCUITS}")
