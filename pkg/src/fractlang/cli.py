"""Command-line front end: ``fractlang <command> ...``.

Exit codes: 0 for success or "equivalent", 1 for a semantic negative
(inequivalent terms, rejected derivation), 2 for usage or input errors.
Settings come from flags, then a JSON ``--config`` file, then defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from .fractal import Interpretation, NotAContraction, DimensionMismatch, UnknownAction, solve
from .lts import StateBudgetExceeded, unfold, unfold_prob, underlying_lts
from .measure import sample_measure, trace_measure, tzeng_equiv
from .proofs import MalformedDerivation, check, parse_derivation
from .render import RenderConfig, render_measure, render_set
from .terms import ProbabilityRangeError, TermSyntaxError, WellFormednessError, parse_pterm, parse_term, pretty
from .traces import trace_equiv, traces

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


@dataclass
class Settings:
    """Tunable knobs shared by the commands that need them."""

    seed: int = 0
    threads: int = 1
    depth: int = 8
    width: int = 512
    height: int = 512
    bbox: str = "auto"
    samples: int = 100_000
    truncation: int = 30
    max_states: int = 100_000

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "Settings":
        merged = {}
        if args.config:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
            if not isinstance(data, dict):
                raise ValueError("config file must hold a JSON object")
            known = {f.name for f in fields(cls)}
            unknown = sorted(set(data) - known)
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(unknown)}")
            merged.update(data)
        for f in fields(cls):
            value = getattr(args, f.name, None)
            if value is not None:
                merged[f.name] = value
        s = cls(**merged)
        if s.threads < 1:
            raise ValueError("--threads must be at least 1")
        return s

    def render_config(self, output: str | None) -> RenderConfig:
        bbox = self.bbox
        if isinstance(bbox, str) and bbox != "auto":
            bbox = tuple(float(v) for v in bbox.split(","))
            if len(bbox) != 4:
                raise ValueError("--bbox takes xmin,ymin,xmax,ymax")
        return RenderConfig(self.width, self.height, bbox, self.depth, self.samples, self.truncation, output)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _is_prob(text: str) -> bool:
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    return "+[" in body


def _load_term(path: str, prob: bool | None = None):
    text = _read(path)
    if prob is None:
        prob = _is_prob(text)
    return (parse_pterm if prob else parse_term)(text), prob


def _load_classic(path: str):
    e, prob = _load_term(path)
    if prob:
        raise UsageError(f"{path}: expected a term with '+', found probabilistic choice")
    return e


def _load_prob(path: str):
    e, _ = _load_term(path, prob=True)
    return e


def _emit(data: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


# -- commands ------------------------------------------------------------------------


def cmd_parse(args, s: Settings) -> int:
    e, prob = _load_term(args.file, True if args.prob else None)
    print(pretty(e, canonical=args.canonical))
    if args.dump_lts:
        sys.stdout.write((unfold_prob if prob else unfold)(e, max_states=s.max_states).dump())
    return EXIT_OK


def cmd_dump_lts(args, s: Settings) -> int:
    e, prob = _load_term(args.file, True if args.prob else None)
    sys.stdout.write((unfold_prob if prob else unfold)(e, max_states=s.max_states).dump())
    return EXIT_OK


def cmd_equiv(args, s: Settings) -> int:
    e1, e2 = _load_classic(args.first), _load_classic(args.second)
    ok, witness = trace_equiv(unfold(e1, max_states=s.max_states), 0, unfold(e2, max_states=s.max_states), 0)
    if ok:
        print("equivalent")
        return EXIT_OK
    print("inequivalent")
    print(" ".join(witness))
    return EXIT_NEGATIVE


def cmd_check_proof(args, s: Settings) -> int:
    d = parse_derivation(_read(args.file), args.system)
    verdict = check(d)
    if verdict.ok:
        print(f"accepted ({len(d.steps)} steps)")
        return EXIT_OK
    print(f"rejected at step {verdict.step}: {verdict.reason}")
    return EXIT_NEGATIVE


def cmd_traces(args, s: Settings) -> int:
    e, prob = _load_term(args.file)
    lts = underlying_lts(unfold_prob(e, max_states=s.max_states)) if prob else unfold(e, max_states=s.max_states)
    for w in sorted(traces(lts, 0, s.depth).words, key=lambda w: (len(w), w)):
        print(" ".join(w) if w else "<empty>")
    return EXIT_OK


def cmd_render(args, s: Settings) -> int:
    e, prob = _load_term(args.term)
    lts = underlying_lts(unfold_prob(e, max_states=s.max_states)) if prob else unfold(e, max_states=s.max_states)
    interp = Interpretation.load(args.interp)
    cfg = s.render_config(args.output)
    sv = solve(lts, interp, s.depth, threads=s.threads)
    _emit(render_set(sv[0], cfg), cfg.output)
    if args.output:
        print(f"wrote {args.output}: {len(sv[0])} points, Hausdorff guarantee {sv[0].guarantee:.3g}", file=sys.stderr)
    return EXIT_OK


def cmd_measure(args, s: Settings) -> int:
    e = _load_prob(args.file)
    word = [a for a in args.word.split(",") if a] if args.word else []
    print(trace_measure(unfold_prob(e, max_states=s.max_states), 0, word))
    return EXIT_OK


def cmd_measure_equiv(args, s: Settings) -> int:
    m1 = unfold_prob(_load_prob(args.first), max_states=s.max_states)
    m2 = unfold_prob(_load_prob(args.second), max_states=s.max_states)
    ok, witness = tzeng_equiv(m1, 0, m2, 0)
    if ok:
        print("equivalent")
        return EXIT_OK
    print("inequivalent")
    print(" ".join(witness) if witness else "<empty>")
    print(f"{trace_measure(m1, 0, witness)} vs {trace_measure(m2, 0, witness)}")
    return EXIT_NEGATIVE


def cmd_measure_render(args, s: Settings) -> int:
    m = unfold_prob(_load_prob(args.term), max_states=s.max_states)
    interp = Interpretation.load(args.interp)
    cfg = s.render_config(args.output)
    pts = sample_measure(m, 0, interp, s.truncation, s.samples, s.seed)
    _emit(render_measure(pts, cfg), cfg.output)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fractlang",
        description="Process terms, their trace semantics, and the fractals they describe.",
    )
    p.add_argument("--seed", type=int, default=None, help="RNG seed for sampling (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for set iteration (default 1)")
    p.add_argument("--config", default=None, help="JSON file with default settings; flags override it")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=fn)
        return sp

    def render_opts(sp):
        sp.add_argument("--width", type=int, default=None, help="image width in pixels (default 512)")
        sp.add_argument("--height", type=int, default=None, help="image height in pixels (default 512)")
        sp.add_argument("--bbox", default=None, help="xmin,ymin,xmax,ymax or 'auto' (default)")
        sp.add_argument("-o", "--output", default=None, help="image file (default: stdout)")

    sp = add("parse", cmd_parse, "parse a term file and print it back")
    sp.add_argument("file", help="term file, '-' for stdin")
    sp.add_argument("--prob", action="store_true", help="force the probabilistic grammar")
    sp.add_argument("--canonical", action="store_true", help="print with canonical binder names")
    sp.add_argument("--dump-lts", action="store_true", help="also print the reachable transition system")

    sp = add("dump-lts", cmd_dump_lts, "print the reachable LTS (or LMC) of a term")
    sp.add_argument("file")
    sp.add_argument("--prob", action="store_true", help="force the probabilistic grammar")

    sp = add("equiv", cmd_equiv, "decide trace equivalence; prints a distinguishing word if any")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = add("check-proof", cmd_check_proof, "check an equational derivation")
    sp.add_argument("file")
    sp.add_argument("--system", choices=("classic", "prob"), default="classic", help="axiom system (default classic)")

    sp = add("traces", cmd_traces, "list the traces of a term up to --depth")
    sp.add_argument("file")
    sp.add_argument("--depth", type=int, default=None, help="maximal trace length (default 8)")

    sp = add("render", cmd_render, "render the fractal of a term's root state as PPM")
    sp.add_argument("term")
    sp.add_argument("interp", help="interpretation file ('dim d' and 'map a : ... | ...' lines)")
    sp.add_argument("--depth", type=int, default=None, help="iterations of the system operator (default 8)")
    render_opts(sp)

    sp = add("measure", cmd_measure, "exact trace measure of a cylinder")
    sp.add_argument("file")
    sp.add_argument("--word", default="", help="comma-separated actions, e.g. a,b,a (default: empty word)")

    sp = add("measure-equiv", cmd_measure_equiv, "decide trace-measure equivalence of two probabilistic terms")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = add("measure-render", cmd_measure_render, "render a sampled fractal measure as PGM")
    sp.add_argument("term")
    sp.add_argument("interp")
    sp.add_argument("--samples", type=int, default=None, help="number of samples (default 100000)")
    sp.add_argument("--truncation", type=int, default=None, help="steps per sample (default 30)")
    render_opts(sp)
    return p


_INPUT_ERRORS = (
    OSError,
    ValueError,
    TermSyntaxError,
    WellFormednessError,
    ProbabilityRangeError,
    MalformedDerivation,
    NotAContraction,
    DimensionMismatch,
    UnknownAction,
    StateBudgetExceeded,
    UsageError,
    json.JSONDecodeError,
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings.resolve(args)
        return args.func(args, settings)
    except TermSyntaxError as exc:
        print(f"fractlang: syntax error: {exc}", file=sys.stderr)
    except _INPUT_ERRORS as exc:
        print(f"fractlang: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
