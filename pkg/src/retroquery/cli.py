"""Command line front end emitting deterministic Markdown or CSV reports.

Five subcommands: analyze (sharing pairs, instances, depths), predict
(query counts), infer-r (search-family scan), simulate (block states and
forced or sampled measurements), histories (path listing with
justifications).  Identical argv plus seed always renders byte-identical
output; all floats go through one .12g formatter, state dumps through
.15f.
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import NoValidSharing, RetroqueryError, ValidationError
from .feedback import FeedbackConfig, all_instances, find_pairs
from .problems import (
    OracleProblem,
    gen_deutsch,
    gen_deutsch_jozsa,
    gen_grover,
    gen_simon,
    load_problem,
)
from .query_oracle import minimax_depth
from .retro_model import (
    auto_strategy,
    grover_optimal_k,
    grover_queries_for_r,
    grover_r_scan,
    infer_r,
    predict_queries,
)
from .simulator import (
    BlockState,
    apply,
    builtin_circuit,
    check_states,
    classify_history,
    complete_a_partition,
    complete_b_partition,
    entropy_of,
    enumerate_histories,
    input_state,
    measure_partition,
    sharp_argument,
)

# the sharing engine enumerates partitions; past this many settings the
# predict command reports the closed form only
ENGINE_MAX_SETTINGS = 256

DUMP_HEADERS = ("setting", "argument", "check_bit", "re", "im", "weight")

FOOTNOTES = (
    "delta_e_solution is the solution entropy of the full setting set minus "
    "the solution entropy of the instance subset, in bits; delta_h_setting "
    "is the matching drop in setting entropy.",
    "predicted queries aggregate instance depths per setting under the chosen "
    "policy: minimax scores each valid pair by its deeper instance and takes "
    "the best pair, maximax takes the deepest instance of any valid pair; the "
    "prediction is the worst setting either way.",
    "optimal search iteration counts round pi/(4*asin(2^(-n/2))) - 1/2 up "
    "with ceil; inferred advance-knowledge fractions follow "
    "1 - log2(queries+1)/n.",
    "measurement sampling draws from one random.Random seeded as shown in "
    "the run configuration.",
)


# === report assembly ===

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format(value + 0.0, ".12g")  # +0.0 folds away negative zero
    return str(value)


def _subset_str(subset) -> str:
    return "{" + ",".join(subset) + "}"


def _md_cell(text: str) -> str:
    return text.replace("|", "\\|")


@dataclass
class Section:
    kind: str  # "table" | "dump" | "notes"
    title: str
    headers: tuple[str, ...]
    rows: list[tuple[str, ...]]


class Report:
    def __init__(self, command: str):
        self.command = command
        self.sections: list[Section] = []

    def table(self, title, headers, rows) -> None:
        formatted = [tuple(_fmt(c) for c in row) for row in rows]
        self.sections.append(Section("table", title, tuple(headers), formatted))

    def kv(self, title, pairs) -> None:
        self.table(title, ("key", "value"), pairs)

    def dump(self, title: str, state: BlockState) -> None:
        rows = []
        for b in sorted(state.blocks):
            vec = state.blocks[b]
            w = state.weights[b]
            for idx in range(vec.size):
                amp = vec[idx]
                if abs(amp) > 1e-15:
                    rows.append((
                        b,
                        state.problem.arguments[idx // 2],
                        str(idx % 2),
                        f"{amp.real + 0.0:.15f}",
                        f"{amp.imag + 0.0:.15f}",
                        f"{w + 0.0:.15f}",
                    ))
        self.sections.append(Section("dump", title, DUMP_HEADERS, rows))

    def notes(self) -> None:
        self.sections.append(Section("notes", "Notes", ("note",), [(n,) for n in FOOTNOTES]))

    def render(self, fmt: str) -> str:
        return self._render_md() if fmt == "md" else self._render_csv()

    def _render_md(self) -> str:
        parts = [f"# retroquery {self.command}", ""]
        for sec in self.sections:
            parts.append(f"## {sec.title}")
            parts.append("")
            if sec.kind == "dump":
                parts.append("```")
                for b, a, v, re, im, w in sec.rows:
                    parts.append(f"{b}|{a}|{v} {re} {im} {w}")
                parts.append("```")
            elif sec.kind == "notes":
                for (note,) in sec.rows:
                    parts.append(f"- {note}")
            else:
                parts.append("| " + " | ".join(sec.headers) + " |")
                parts.append("|" + "|".join(" --- " for _ in sec.headers) + "|")
                for row in sec.rows:
                    parts.append("| " + " | ".join(_md_cell(c) for c in row) + " |")
            parts.append("")
        return "\n".join(parts)

    def _render_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        for sec in self.sections:
            writer.writerow([f"# {sec.title}"])
            writer.writerow(sec.headers)
            for row in sec.rows:
                writer.writerow(row)
            writer.writerow([])
        return buf.getvalue()


# === argument handling ===

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retroquery",
        description="oracle-problem sharing analysis and block simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p):
        p.add_argument("--format", choices=("md", "csv"), default="md")
        p.add_argument("--out", metavar="PATH", default=None)
        p.add_argument("--seed", type=int, default=0)

    def problem_flags(p):
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--problem", choices=("deutsch", "dj", "grover", "simon"))
        grp.add_argument("--file", metavar="PATH")
        p.add_argument("--n", type=int, default=None)

    def engine_flags(p):
        p.add_argument("--apply-no", choices=("auto", "on", "off"), default="auto")
        p.add_argument(
            "--strategy",
            choices=("auto", "general", "bitmask", "half-table"),
            default="auto",
        )

    analyze = sub.add_parser("analyze", help="sharing pairs, instances and depths")
    problem_flags(analyze)
    engine_flags(analyze)
    analyze.add_argument("--setting", default=None)
    analyze.add_argument("--policy", choices=("minimax", "maximax"), default="minimax")
    analyze.add_argument("--strict", action="store_true")
    output_flags(analyze)

    predict = sub.add_parser("predict", help="predicted query counts")
    problem_flags(predict)
    engine_flags(predict)
    predict.add_argument("--r", type=float, default=0.5)
    predict.add_argument("--policy", choices=("minimax", "maximax"), default="minimax")
    predict.add_argument("--strict", action="store_true")
    output_flags(predict)

    infer = sub.add_parser("infer-r", help="search-family advance-knowledge scan")
    infer.add_argument("--n-min", type=int, required=True)
    infer.add_argument("--n-max", type=int, required=True)
    output_flags(infer)

    simulate = sub.add_parser("simulate", help="run a builtin circuit")
    simulate.add_argument("--circuit", required=True)
    simulate.add_argument("--setting", default=None)
    simulate.add_argument("--check-states", action="store_true")
    output_flags(simulate)

    histories = sub.add_parser("histories", help="path listing with justifications")
    histories.add_argument("--circuit", required=True)
    histories.add_argument("--setting", required=True)
    engine_flags(histories)
    output_flags(histories)

    return parser


def _resolve_problem(args) -> OracleProblem:
    if args.file:
        return load_problem(args.file)
    if not args.problem:
        raise ValidationError("need --problem or --file")
    n = args.n
    if args.problem == "deutsch":
        if n not in (None, 1):
            raise ValidationError("the two-table parity problem is fixed at n = 1")
        return gen_deutsch()
    if args.problem == "dj":
        return gen_deutsch_jozsa(2 if n is None else n)
    if args.problem == "grover":
        return gen_grover(2 if n is None else n)
    return gen_simon(2 if n is None else n)


def _resolve_strategy(flag: str, problem: OracleProblem) -> str:
    if flag == "auto":
        return auto_strategy(problem)
    return "half_table" if flag == "half-table" else flag


# === subcommands ===

def _no_valid_sharing_table(rep: Report, exc: NoValidSharing) -> None:
    rows = sorted((exc.b, cond, n) for cond, n in exc.failure_counts.items())
    rep.table("No valid sharing", ("setting", "condition", "rejected pairs"), rows)


def cmd_analyze(args) -> tuple[Report, bool]:
    problem = _resolve_problem(args)
    if args.setting is not None:
        problem.setting(args.setting)
    config = FeedbackConfig(apply_condition_no=args.apply_no)
    strategy = _resolve_strategy(args.strategy, problem)

    rep = Report("analyze")
    rep.kv("Run configuration", [
        ("command", "analyze"),
        ("problem", problem.name),
        ("settings", len(problem.settings)),
        ("setting", args.setting if args.setting is not None else "all"),
        ("apply-no", args.apply_no),
        ("strategy", strategy),
        ("policy", args.policy),
        ("seed", args.seed),
        ("version", __version__),
    ])

    prediction = None
    failure = None
    try:
        prediction = predict_queries(problem, config, strategy, args.policy)
    except NoValidSharing as exc:
        if args.strict:
            raise
        failure = exc

    targets = [args.setting] if args.setting is not None else list(problem.setting_labels)
    for b in targets:
        pairs = find_pairs(problem, b, config, strategy)
        rep.table(
            f"Valid pairs at {b}",
            ("first partition", "second partition"),
            [(pr.p_i.label, pr.p_j.label) for pr in pairs],
        )
        inst_rows = []
        for inst in all_instances(problem, b, config, strategy):
            depth = minimax_depth(problem, inst.subset).depth
            inst_rows.append((
                _subset_str(inst.subset),
                inst.r_value,
                inst.delta_e_solution,
                inst.delta_h_setting,
                depth,
            ))
        rep.table(
            f"Knowledge instances at {b}",
            ("subset", "r_value", "delta_e_solution", "delta_h_setting", "depth"),
            inst_rows,
        )

    if prediction is not None:
        rep.table(
            "Per-setting prediction",
            ("setting", "valid pairs", "aggregate depth"),
            [(r.b, r.pair_count, r.aggregate_depth) for r in prediction.per_setting],
        )
        rep.table(
            "Predicted queries",
            ("policy", "strategy", "queries"),
            [(prediction.policy, prediction.strategy, prediction.predicted_queries)],
        )
    else:
        _no_valid_sharing_table(rep, failure)
        rep.table(
            "Predicted queries",
            ("policy", "strategy", "queries"),
            [(args.policy, strategy, "n/a")],
        )
    rep.notes()
    return rep, False


def cmd_predict(args) -> tuple[Report, bool]:
    problem = _resolve_problem(args)
    r = args.r
    if not 0.0 < r <= 1.0:
        raise ValidationError("--r must lie in (0, 1]")
    is_search = args.problem == "grover"
    if not is_search and abs(r - 0.5) > 1e-12:
        raise ValidationError(
            "only the search family supports advance-knowledge fractions "
            "other than 1/2"
        )
    config = FeedbackConfig(apply_condition_no=args.apply_no)
    strategy = _resolve_strategy(args.strategy, problem)

    rep = Report("predict")
    rep.kv("Run configuration", [
        ("command", "predict"),
        ("problem", problem.name),
        ("settings", len(problem.settings)),
        ("r", r),
        ("apply-no", args.apply_no),
        ("strategy", strategy),
        ("policy", args.policy),
        ("seed", args.seed),
        ("version", __version__),
    ])

    engine_queries = None
    if len(problem.settings) <= ENGINE_MAX_SETTINGS:
        try:
            prediction = predict_queries(problem, config, strategy, args.policy)
            engine_queries = prediction.predicted_queries
            rep.table(
                "Engine prediction",
                ("policy", "strategy", "queries"),
                [(prediction.policy, prediction.strategy, engine_queries)],
            )
        except NoValidSharing as exc:
            if args.strict:
                raise
            _no_valid_sharing_table(rep, exc)
    else:
        rep.table(
            "Engine prediction",
            ("policy", "strategy", "queries"),
            [(args.policy, strategy, f"skipped ({len(problem.settings)} settings)")],
        )

    if is_search:
        n = problem.arg_bits
        k_opt = grover_optimal_k(n)
        closed = grover_queries_for_r(n, r)
        rep.table(
            "Closed forms",
            ("n", "r", "queries at r", "optimal iterations", "r from optimal"),
            [(n, r, closed, k_opt, infer_r(n, k_opt).r_value)],
        )
        headline = [("closed form", closed)]
    else:
        headline = [("sharing engine", engine_queries if engine_queries is not None else "n/a")]
    rep.table("Predicted queries", ("source", "queries"), headline)
    rep.notes()
    return rep, False


def cmd_infer_r(args) -> tuple[Report, bool]:
    rows = grover_r_scan(args.n_min, args.n_max)
    rep = Report("infer-r")
    rep.kv("Run configuration", [
        ("command", "infer-r"),
        ("n-min", args.n_min),
        ("n-max", args.n_max),
        ("seed", args.seed),
        ("version", __version__),
    ])
    rep.table(
        "Advance-knowledge scan",
        ("n", "optimal iterations", "inferred r", "queries at r=1/2",
         "pi/4 * 2^(n/2)"),
        [(row.n, row.k_opt, row.r_value, row.half_r_queries, row.scaling_reference)
         for row in rows],
    )
    rep.notes()
    return rep, False


def _agreement_rows(out_state: BlockState):
    problem = out_state.problem
    sharp = {b: sharp_argument(out_state, b) or "-" for b in problem.setting_labels}
    expected = {}
    for s in problem.settings:
        expected[s.b] = problem.meta.period[s.b] if problem.meta is not None else s.solution
    sol_by_sharp: dict[str, set[str]] = {}
    sharp_by_sol: dict[str, set[str]] = {}
    for s in problem.settings:
        sol_by_sharp.setdefault(sharp[s.b], set()).add(s.solution)
        sharp_by_sol.setdefault(s.solution, set()).add(sharp[s.b])
    rows = []
    for s in problem.settings:
        agrees = len(sol_by_sharp[sharp[s.b]]) == 1
        if problem.meta is not None:
            agrees = sharp[s.b] == expected[s.b]
        rows.append((s.b, sharp[s.b], expected[s.b], agrees))
    summary = [
        ("arguments determine solutions", all(len(v) == 1 for v in sol_by_sharp.values())),
        ("solutions determine arguments", all(len(v) == 1 for v in sharp_by_sol.values())),
    ]
    if problem.meta is not None:
        summary.append((
            "sharp argument equals period",
            all(sharp[b] == expected[b] for b in problem.setting_labels),
        ))
    return rows, summary


def cmd_simulate(args) -> tuple[Report, bool]:
    bi = builtin_circuit(args.circuit)
    problem = bi.problem
    if args.setting is not None:
        problem.setting(args.setting)
    rng = random.Random(args.seed)

    rep = Report("simulate")
    rep.kv("Run configuration", [
        ("command", "simulate"),
        ("circuit", bi.name),
        ("setting", args.setting if args.setting is not None else "sampled"),
        ("check-states", args.check_states),
        ("seed", args.seed),
        ("version", __version__),
    ])

    inp = input_state(problem)
    out = apply(inp, bi.gates)
    rep.dump("Input state", inp)
    rep.dump("Output state", out)

    forced = (args.setting,) if args.setting is not None else None
    cls_b, after_b = measure_partition(out, "B", complete_b_partition(problem), forced, rng)
    prob_b = sum(out.weights[x] for x in cls_b)
    cls_a, final = measure_partition(after_b, "A", complete_a_partition(problem), None, rng)
    keep = {problem.arguments.index(a) for a in cls_a}
    prob_a = 0.0
    for b, vec in after_b.blocks.items():
        t = np.abs(vec.reshape(-1, 2)) ** 2
        prob_a += after_b.weights[b] * float(sum(t[i].sum() for i in keep))
    rep.table(
        "Measurements",
        ("step", "register", "outcome", "probability"),
        [
            ("1", "B", _subset_str(cls_b), prob_b),
            ("2", "A", _subset_str(cls_a), prob_a),
        ],
    )
    rep.dump("Final state", final)

    rows, summary = _agreement_rows(out)
    expected_label = "period" if problem.meta is not None else "solution"
    rep.table(
        "Solution agreement",
        ("setting", "sharp argument", expected_label, "agrees"),
        rows,
    )
    rep.table("Agreement summary", ("relation", "holds"), summary)
    rep.table(
        "Entropies",
        ("quantity", "bits"),
        [
            ("setting register at input", entropy_of(inp, "B")),
            ("argument register at output", entropy_of(out, "A")),
            ("setting register after measurement", entropy_of(final, "B")),
        ],
    )

    failed = False
    if args.check_states:
        checks = check_states(bi.name)
        rep.table(
            "State checks",
            ("check", "max error", "status"),
            [(c.label, c.max_err, "pass" if c.passed else "FAIL") for c in checks],
        )
        failed = not all(c.passed for c in checks)
    rep.notes()
    return rep, failed


def cmd_histories(args) -> tuple[Report, bool]:
    bi = builtin_circuit(args.circuit)
    problem = bi.problem
    problem.setting(args.setting)
    config = FeedbackConfig(apply_condition_no=args.apply_no)
    strategy = _resolve_strategy(args.strategy, problem)

    rep = Report("histories")
    rep.kv("Run configuration", [
        ("command", "histories"),
        ("circuit", bi.name),
        ("setting", args.setting),
        ("apply-no", args.apply_no),
        ("strategy", strategy),
        ("seed", args.seed),
        ("version", __version__),
    ])

    hists = enumerate_histories(problem, bi.gates, args.setting)
    unjustified = 0
    rows = []
    for i, h in enumerate(hists, start=1):
        insts = classify_history(problem, h, config, strategy)
        if not insts:
            unjustified += 1
        rows.append((
            str(i),
            ",".join(h.queries) or "-",
            h.states[-1][1],
            str(h.states[-1][2]),
            h.amplitude.real,
            h.amplitude.imag,
            " ".join(_subset_str(inst.subset) for inst in insts) or "-",
            bool(insts),
        ))
    rep.table(
        "Histories",
        ("#", "queried", "final argument", "final check bit", "re", "im",
         "justified by", "justified"),
        rows,
    )
    rep.table(
        "Summary",
        ("key", "value"),
        [("histories", len(hists)), ("unjustified", unjustified)],
    )
    rep.notes()
    return rep, False


_DISPATCH = {
    "analyze": cmd_analyze,
    "predict": cmd_predict,
    "infer-r": cmd_infer_r,
    "simulate": cmd_simulate,
    "histories": cmd_histories,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report, failed = _DISPATCH[args.command](args)
    except RetroqueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = report.render(args.format)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
