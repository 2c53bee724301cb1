"""Command-line front end: ``channels``, ``region`` and ``simulate``.

Exit codes are 0 on success, 1 on a domain error (bad channel document,
empty region, enumeration cap) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .channels import BUILTINS, TwoWayChannel, get_builtin, has_common_output, resolve_channel
from .errors import CapExceeded, SecrecyError
from .info import InputPolicy
from .regions import (
    INNER_FEEDBACK,
    INNER_NOFEEDBACK,
    OUTER,
    GridSpec,
    RateRegion,
    default_workers,
    sweep,
)
from .sim import DEFAULT_CAP, LEAKAGE_MODES, RATE_NAMES, SimConfig, run_experiment

KIND_LABELS = {"inner": INNER_FEEDBACK, "nofeedback": INNER_NOFEEDBACK, "outer": OUTER}


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# channels


def _channel_table(ch: TwoWayChannel) -> str:
    lines = [f"{ch.name}: |X1|={ch.x1_size} |X2|={ch.x2_size} |Y1|={ch.y1_size} "
             f"|Y2|={ch.y2_size} |Z|={ch.z_size}"]
    lines.append("  x1 x2 -> y1 y2 z")
    for x1 in range(ch.x1_size):
        for x2 in range(ch.x2_size):
            w = ch.transitions[x1, x2]
            for y1, y2, z in zip(*np.nonzero(w)):
                p = w[y1, y2, z]
                tail = "" if p == 1.0 else f"  (p={_fmt(p)})"
                lines.append(f"  {x1:>2} {x2:>2} -> {y1:>2} {y2:>2} {z}{tail}")
    return "\n".join(lines) + "\n"


def cmd_channels(args) -> int:
    chans = [get_builtin(name) for name in BUILTINS]
    if args.format == "json":
        _write(json.dumps([c.to_dict() for c in chans], indent=2) + "\n", None)
    else:
        _write("\n".join(_channel_table(c) for c in chans), None)
    return 0


# ---------------------------------------------------------------------------
# region


def region_csv(regions: Sequence[RateRegion]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r2", "r1s_max", "label"])
    for reg in regions:
        r2, r1s = reg.sample()
        for a, b in zip(r2, r1s):
            w.writerow([_fmt(a), _fmt(b), reg.label])
    return buf.getvalue()


def region_json(regions: Sequence[RateRegion]) -> str:
    docs = [r.to_dict() for r in regions]
    body = docs[0] if len(docs) == 1 else docs
    return json.dumps(body, indent=2) + "\n"


def _render(regions, fmt):
    return region_csv(regions) if fmt == "csv" else region_json(regions)


def cmd_region(args) -> int:
    ch = resolve_channel(args.channel)
    grid = GridSpec(step=args.step, q_card=args.q_card, prefix_step=args.prefix_grid)
    if args.kind == "all":
        kinds = [INNER_FEEDBACK, INNER_NOFEEDBACK, OUTER]
        if not has_common_output(ch):
            print("note: outer curve skipped, channel outputs differ", file=sys.stderr)
            kinds.remove(OUTER)
    else:
        kinds = [KIND_LABELS[args.kind]]
    workers = default_workers()
    regions = [sweep(ch, grid, k, workers=workers) for k in kinds]

    if args.out is None or args.compare or len(regions) == 1:
        _write(_render(regions, args.format), args.out)
        return 0
    out = Path(args.out)
    for reg in regions:
        path = out.with_name(f"{out.stem}.{reg.label}{out.suffix}")
        _write(_render([reg], args.format), str(path))
    return 0


# ---------------------------------------------------------------------------
# simulate


def _rates(text: str) -> dict[str, float]:
    parts = text.split(",")
    if len(parts) != len(RATE_NAMES):
        raise argparse.ArgumentTypeError(f"expected {len(RATE_NAMES)} comma-separated rates")
    try:
        return dict(zip(RATE_NAMES, (float(p) for p in parts)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"rates must be numbers: {text!r}") from None


def _bernoulli(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"policy must be numbers: {text!r}") from None
    if len(vals) not in (2, 4):
        raise argparse.ArgumentTypeError("policy takes p1,p2 or p1,p2,c1,c2")
    return vals


def _policy_from_doc(doc) -> InputPolicy:
    if isinstance(doc, list) and len(doc) in (2, 4):
        return InputPolicy.bernoulli(*doc)
    try:
        return InputPolicy(
            [1.0], [doc["u1"]], [doc["u2"]], doc["x1_given_u1"], doc["x2_given_u2"]
        )
    except (KeyError, TypeError) as exc:
        raise UsageError(
            "config policy must be [p1, p2(, c1, c2)] or an object with "
            "u1, u2, x1_given_u1, x2_given_u2"
        ) from exc


def _default_policy(ch: TwoWayChannel) -> InputPolicy:
    if (ch.x1_size, ch.x2_size) == (2, 2):
        return InputPolicy.bernoulli(0.5, 0.5)
    return InputPolicy.identity(np.full(ch.x1_size, 1 / ch.x1_size), np.full(ch.x2_size, 1 / ch.x2_size))


_CONFIG_KEYS = ("n", "b", "epsilon", "seed", "trials", "leakage", "leakage_samples",
                "leakage_trials", "lemma_trials", "typicality_floor") + RATE_NAMES


def build_config(ch: TwoWayChannel, args) -> SimConfig:
    """Merge a config file (if any) with command-line overrides."""
    doc: dict = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
    unknown = set(doc) - set(_CONFIG_KEYS) - {"policy", "cap", "version"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    kw = {k: doc[k] for k in _CONFIG_KEYS if k in doc}
    if "cap" in doc:
        kw["cap"] = int(doc["cap"])
    policy = _policy_from_doc(doc["policy"]) if "policy" in doc else _default_policy(ch)

    for k in ("n", "b", "epsilon", "trials", "seed", "leakage", "leakage_trials", "lemma_trials"):
        v = getattr(args, k)
        if v is not None:
            kw[k] = v
    if args.rates is not None:
        kw.update(args.rates)
    if args.cap is not None:
        kw["cap"] = 2**args.cap
    if args.policy is not None:
        policy = InputPolicy.bernoulli(*args.policy)
    if "n" not in kw:
        raise UsageError("block length missing: pass --n or set it in --config")
    return SimConfig(policy=policy, **kw)


def cmd_simulate(args) -> int:
    ch = resolve_channel(args.channel)
    cfg = build_config(ch, args)
    report = run_experiment(ch, cfg)
    _write(report.to_json() + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="twoway-secrecy",
        description="Secrecy rate regions and coding simulations for two-way wiretap channels.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("channels", help="list the builtin channels")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_channels)

    r = sub.add_parser("region", help="sweep a rate region and write its boundary")
    r.add_argument("channel", help="builtin name or path to a channel document")
    r.add_argument("--kind", choices=("inner", "nofeedback", "outer", "all"), default="inner")
    r.add_argument("--step", type=float, default=0.02, help="policy grid step")
    r.add_argument("--q-card", type=int, choices=(1, 2), default=1)
    r.add_argument("--prefix-grid", type=float, default=None, metavar="STEP",
                   help="sweep BSC prefix crossovers on this grid")
    r.add_argument("--out", default=None, help="output path (default: stdout)")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--compare", action="store_true",
                   help="with --kind all, write every curve into one file")
    r.set_defaults(func=cmd_region)

    s = sub.add_parser("simulate", help="run the block-Markov coding experiment")
    s.add_argument("channel", help="builtin name or path to a channel document")
    s.add_argument("--config", default=None, help="JSON file with configuration fields")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--b", type=int, default=None)
    s.add_argument("--rates", type=_rates, default=None, metavar="R1U,R1S,R1X,R2,R2K,R2X")
    s.add_argument("--policy", type=_bernoulli, default=None, metavar="P1,P2[,C1,C2]",
                   help="Bernoulli(P1), Bernoulli(P2) auxiliaries with BSC(C1), BSC(C2) prefixes")
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--cap", type=int, default=None, metavar="EXP",
                   help=f"enumeration cap as a power of two (default {DEFAULT_CAP.bit_length() - 1})")
    s.add_argument("--leakage", choices=LEAKAGE_MODES, default=None)
    s.add_argument("--leakage-trials", type=int, default=None)
    s.add_argument("--lemma-trials", type=int, default=None)
    s.add_argument("--out", default=None, help="output path (default: stdout)")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except CapExceeded as exc:
        print(f"error: {exc}. Reduce n, b or the rates, or raise --cap.", file=sys.stderr)
        return 1
    except (SecrecyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
