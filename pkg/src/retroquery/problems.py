"""Oracle problem definitions and the builtin problem families.

A problem is a finite set of settings b. Each setting fixes a black-box
table f_b mapping argument bit strings to output bit strings, plus a
solution label s(b) that the agent must produce. For the table-suffix
families (Deutsch, Deutsch-Jozsa, Simon) the setting string is exactly the
table read in increasing argument order, so knowing bits of b is knowing
table entries.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, SizeError, UnknownSetting, ValidationError

MAX_ARG_BITS = 16

_BITS = frozenset("01")


def bit_strings(width: int) -> list[str]:
    """All bit strings of the given width, in lexicographic order."""
    return [format(i, f"0{width}b") for i in range(2 ** width)]


def _is_bits(s: str) -> bool:
    return isinstance(s, str) and len(s) > 0 and set(s) <= _BITS


def xor_bits(a: str, b: str) -> str:
    return "".join("1" if x != y else "0" for x, y in zip(a, b, strict=True))


@dataclass
class Setting:
    """One problem setting: label b, oracle table, solution label.

    `feature` is a coarse attribute of the setting used by the non-obvious
    structure condition; it defaults to the solution label and only differs
    when a family distinguishes a coarse answer (e.g. constant/balanced)
    from a finer solution labeling.
    """

    b: str
    table: dict[str, str]
    solution: str
    feature: str | None = None

    def __post_init__(self):
        if self.feature is None:
            self.feature = self.solution


@dataclass
class SimonMeta:
    """Period map b -> h for periodic (2-to-1) problems; h is never all zeros."""

    period: dict[str, str]

    def as_dict(self) -> dict[str, str]:
        return dict(self.period)


@dataclass
class OracleProblem:
    name: str
    arg_bits: int
    out_bits: int
    settings: tuple[Setting, ...] = ()
    meta: SimonMeta | None = None
    structured: bool = field(init=False, default=False)

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "settings", tuple(sorted(self.settings, key=lambda s: s.b)))
        # structured <=> the setting strings do not fill their whole bit space
        self.structured = len(self.settings) < 2 ** len(self.settings[0].b)
        self._by_b = {s.b: s for s in self.settings}

    def _validate(self) -> None:
        if not isinstance(self.arg_bits, int) or self.arg_bits < 1:
            raise ValidationError("arg_bits must be a positive integer")
        if self.arg_bits > MAX_ARG_BITS:
            raise SizeError(f"arg_bits {self.arg_bits} exceeds cap {MAX_ARG_BITS}")
        if not isinstance(self.out_bits, int) or self.out_bits < 1:
            raise ValidationError("out_bits must be a positive integer")
        if not self.settings:
            raise ValidationError("a problem needs at least one setting")

        args = bit_strings(self.arg_bits)
        b_len = len(self.settings[0].b)
        sol_len = len(self.settings[0].solution)
        seen: set[str] = set()
        for s in self.settings:
            if not _is_bits(s.b):
                raise ValidationError(f"setting label {s.b!r} is not a bit string")
            if len(s.b) != b_len:
                raise ValidationError("setting labels must share one width")
            if s.b in seen:
                raise ValidationError(f"duplicate setting label {s.b}")
            seen.add(s.b)
            if sorted(s.table) != args:
                raise ValidationError(
                    f"table of setting {s.b} must cover exactly the {len(args)} arguments"
                )
            for a, v in s.table.items():
                if not _is_bits(v) or len(v) != self.out_bits:
                    raise ValidationError(
                        f"table value {v!r} at argument {a} of setting {s.b} "
                        f"is not a {self.out_bits}-bit string"
                    )
            if not _is_bits(s.solution) or len(s.solution) != sol_len:
                raise ValidationError("solution labels must be bit strings of one width")
            if s.feature is None or not isinstance(s.feature, str) or not s.feature:
                raise ValidationError("feature must be a non-empty string")

        if self.meta is not None:
            period = self.meta.as_dict()
            if set(period) != seen:
                raise ValidationError("period map must cover exactly the settings")
            for b, h in period.items():
                if not _is_bits(h) or "1" not in h:
                    raise ValidationError(f"period of {b} must be a non-zero bit string")
                table = next(s.table for s in self.settings if s.b == b)
                if len(h) != self.arg_bits:
                    raise ValidationError(f"period of {b} must have {self.arg_bits} bits")
                for a in table:
                    if table[a] != table[xor_bits(a, h)]:
                        raise ValidationError(
                            f"declared period {h} is not a period of the table of {b}"
                        )

    # --- lookups ---

    def setting(self, b: str) -> Setting:
        try:
            return self._by_b[b]
        except KeyError:
            raise UnknownSetting(f"unknown setting {b!r} for problem {self.name}") from None

    @property
    def setting_labels(self) -> tuple[str, ...]:
        return tuple(s.b for s in self.settings)

    @property
    def arguments(self) -> list[str]:
        return bit_strings(self.arg_bits)

    def is_table_suffix(self) -> bool:
        """True when every setting label equals its table in argument order."""
        return all(
            s.b == "".join(s.table[a] for a in sorted(s.table)) for s in self.settings
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, OracleProblem):
            return NotImplemented
        return (
            self.name == other.name
            and self.arg_bits == other.arg_bits
            and self.out_bits == other.out_bits
            and self.settings == other.settings
            and self.meta == other.meta
        )


def require_setting(problem: OracleProblem, b: str) -> Setting:
    return problem.setting(b)


# === Builtin families ===

def gen_deutsch() -> OracleProblem:
    """Four 1-bit tables; solution 0 for constant, 1 for balanced."""
    settings = []
    for f0, f1 in itertools.product("01", repeat=2):
        sol = "0" if f0 == f1 else "1"
        settings.append(Setting(b=f0 + f1, table={"0": f0, "1": f1}, solution=sol))
    return OracleProblem(name="deutsch", arg_bits=1, out_bits=1, settings=tuple(settings))


def gen_grover(n: int) -> OracleProblem:
    """Search: f_b(a) = 1 iff a = b; the solution is the marked argument."""
    if not isinstance(n, int) or n < 1:
        raise ValidationError("gen_grover needs n >= 1")
    if n > MAX_ARG_BITS:
        raise SizeError(f"gen_grover supports n <= {MAX_ARG_BITS}")
    args = bit_strings(n)
    settings = tuple(
        Setting(b=b, table={a: "1" if a == b else "0" for a in args}, solution=b)
        for b in args
    )
    return OracleProblem(name=f"grover_n{n}", arg_bits=n, out_bits=1, settings=settings)


def gen_deutsch_jozsa(n: int) -> OracleProblem:
    """Constant or balanced n-bit tables, b = table string.

    Solutions label the classes that the ideal computation can actually
    resolve: both constant tables share the all-zeros label and each
    complement pair {b, ~b} of balanced tables shares one label, spelled as
    the binary index of the lex-smaller member within the sorted setting
    list (zero-padded to a uniform width).
    """
    if not isinstance(n, int) or n < 1:
        raise ValidationError("gen_deutsch_jozsa needs n >= 1")
    if n > 4:
        raise SizeError("gen_deutsch_jozsa supports n <= 4")
    size = 2 ** n
    tables = ["0" * size, "1" * size]
    for ones in itertools.combinations(range(size), size // 2):
        tables.append("".join("1" if i in ones else "0" for i in range(size)))
    tables = sorted(set(tables))

    def complement(t: str) -> str:
        return "".join("1" if c == "0" else "0" for c in t)

    # index of the lex-smaller class member, then a uniform binary width
    position = {t: i for i, t in enumerate(tables)}
    rep_index = {}
    for t in tables:
        rep = "0" * size if t in ("0" * size, "1" * size) else min(t, complement(t))
        rep_index[t] = position[rep]
    width = max(1, max(rep_index.values()).bit_length())

    args = bit_strings(n)
    settings = []
    for t in tables:
        feature = "constant" if t in ("0" * size, "1" * size) else "balanced"
        settings.append(
            Setting(
                b=t,
                table={a: t[i] for i, a in enumerate(args)},
                solution=format(rep_index[t], f"0{width}b"),
                feature=feature,
            )
        )
    return OracleProblem(
        name=f"deutsch_jozsa_n{n}", arg_bits=n, out_bits=1, settings=tuple(settings)
    )


def gen_simon(n: int) -> OracleProblem:
    """2-to-1 tables with a hidden XOR period h; the solution is h.

    Every value collides exactly once: f(a) = f(a') iff a' = a XOR h. The
    codomain has width n-1, just enough for the 2^(n-1) cosets, and every
    injective coset labeling occurs, so the family has
    (2^n - 1) * (2^(n-1))! settings.
    """
    if n not in (2, 3):
        raise ValidationError("gen_simon supports n in {2, 3}")
    args = bit_strings(n)
    values = bit_strings(n - 1)
    settings = []
    period: dict[str, str] = {}
    for h in bit_strings(n):
        if "1" not in h:
            continue
        cosets: list[tuple[str, str]] = []
        done: set[str] = set()
        for a in args:
            if a in done:
                continue
            partner = xor_bits(a, h)
            cosets.append((a, partner))
            done.update((a, partner))
        for assignment in itertools.permutations(values):
            table = {}
            for (a1, a2), v in zip(cosets, assignment):
                table[a1] = v
                table[a2] = v
            b = "".join(table[a] for a in args)
            settings.append(Setting(b=b, table=table, solution=h))
            period[b] = h
    settings.sort(key=lambda s: s.b)
    meta = SimonMeta(period=dict(sorted(period.items())))
    return OracleProblem(
        name=f"simon_n{n}", arg_bits=n, out_bits=n - 1, settings=tuple(settings), meta=meta
    )


# === JSON load/save ===

def save_problem(problem: OracleProblem, path: str | Path) -> None:
    doc: dict = {
        "name": problem.name,
        "arg_bits": problem.arg_bits,
        "out_bits": problem.out_bits,
        "settings": [],
    }
    for s in problem.settings:
        entry: dict = {
            "b": s.b,
            "table": {a: s.table[a] for a in sorted(s.table)},
            "solution": s.solution,
        }
        if s.feature != s.solution:
            entry["feature"] = s.feature
        doc["settings"].append(entry)
    if problem.meta is not None:
        doc["period"] = problem.meta.as_dict()
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _req(doc: dict, key: str, kind: type, where: str):
    if key not in doc:
        raise FormatError(f"missing required field in {where}", field=key)
    value = doc[key]
    if not isinstance(value, kind):
        raise FormatError(f"field has wrong type in {where}", field=key)
    return value


def load_problem(path: str | Path) -> OracleProblem:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be a JSON object")

    name = _req(doc, "name", str, "problem")
    arg_bits = _req(doc, "arg_bits", int, "problem")
    out_bits = _req(doc, "out_bits", int, "problem")
    raw_settings = _req(doc, "settings", list, "problem")

    settings = []
    for i, raw in enumerate(raw_settings):
        where = f"settings[{i}]"
        if not isinstance(raw, dict):
            raise FormatError("setting entry must be an object", field=where)
        b = _req(raw, "b", str, where)
        if not _is_bits(b):
            raise FormatError("setting label must be a bit string", field=f"{where}.b")
        table = _req(raw, "table", dict, where)
        for a, v in table.items():
            if not _is_bits(a):
                raise FormatError("table key must be a bit string", field=f"{where}.table")
            if not _is_bits(v):
                raise FormatError("table value must be a bit string", field=f"{where}.table")
        solution = _req(raw, "solution", str, where)
        if not _is_bits(solution):
            raise FormatError("solution must be a bit string", field=f"{where}.solution")
        feature = raw.get("feature")
        if feature is not None and not isinstance(feature, str):
            raise FormatError("feature must be a string", field=f"{where}.feature")
        settings.append(Setting(b=b, table=dict(table), solution=solution, feature=feature))

    meta = None
    if "period" in doc:
        period = _req(doc, "period", dict, "problem")
        for k, v in period.items():
            if not _is_bits(k) or not _is_bits(v):
                raise FormatError("period entries must be bit strings", field="period")
        meta = SimonMeta(period=dict(sorted(period.items())))

    return OracleProblem(
        name=name, arg_bits=arg_bits, out_bits=out_bits, settings=tuple(settings), meta=meta
    )
