"""Command line front end: ``run``, ``audit``, ``attack``, ``gadget`` and ``gen``.

Exit codes: 0 success or confirmed, 1 guarantee not met or verdict not as
expected, 2 unreadable input, 3 violated precondition, 4 external mechanism
broke the line protocol.
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import subprocess
import sys
from fractions import Fraction
from typing import Sequence

from . import gadget, mechanisms, strategy
from .allocation import Allocation, AllocationError, audit
from .valuation import PiecewiseConstant, ValuationError, as_rational, ell, rr

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_PROTOCOL = 4

PROFILE_VERSION = 1

log = logging.getLogger("cakecut")


class ParseError(Exception):
    pass


class PreconditionError(Exception):
    pass


class ProtocolError(Exception):
    pass


def profile_to_json(profile: Sequence[PiecewiseConstant]) -> dict:
    return {"version": PROFILE_VERSION, "agents": [f.to_json() for f in profile]}


def profile_from_json(data) -> list[PiecewiseConstant]:
    if not isinstance(data, dict) or "agents" not in data:
        raise ParseError("profile JSON needs an 'agents' list")
    if data.get("version", PROFILE_VERSION) != PROFILE_VERSION:
        raise ParseError(f"unsupported profile version {data.get('version')!r}")
    try:
        return [PiecewiseConstant.from_json(f) for f in data["agents"]]
    except (ValuationError, TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValuationError, ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


class ExternalMechanism:
    """A mechanism living in another process, one JSON line per query.

    The process receives a profile object and must answer with an allocation
    object, each on a single line.
    """

    def __init__(self, command: str):
        self.command = command
        self.proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )

    def __call__(self, profile: Sequence[PiecewiseConstant]) -> Allocation:
        try:
            self.proc.stdin.write(json.dumps(profile_to_json(profile)) + "\n")
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"external mechanism went away: {exc}") from exc
        if not line:
            raise ProtocolError("external mechanism closed its output")
        try:
            allocation = Allocation.from_json(json.loads(line))
        except (json.JSONDecodeError, AllocationError, TypeError, ValueError) as exc:
            raise ProtocolError(f"bad reply from external mechanism: {exc}") from exc
        if len(allocation) != len(profile):
            raise ProtocolError(f"expected {len(profile)} shares, got {len(allocation)}")
        return allocation

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


def cmd_run(args) -> int:
    profile = profile_from_json(_load_json(args.profile))
    try:
        mech_id = mechanisms.MechanismId(args.mechanism)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    try:
        allocation = mechanisms.run(mech_id, profile)
    except (ValuationError, ValueError) as exc:
        raise PreconditionError(str(exc)) from exc
    report = audit(profile, allocation)
    promised = mechanisms.GUARANTEES[mech_id]
    held = all(getattr(report, name) for name in promised)
    _emit(
        {
            "mechanism": mech_id.value,
            "allocation": allocation.to_json(),
            "audit": report.to_json(),
            "guarantees": {name: getattr(report, name) for name in promised},
        },
        args.out,
    )
    return EXIT_OK if held else EXIT_FAILED


def cmd_audit(args) -> int:
    profile = profile_from_json(_load_json(args.profile))
    try:
        allocation = Allocation.from_json(_load_json(args.allocation))
        report = audit(profile, allocation)
    except AllocationError as exc:
        raise ParseError(str(exc)) from exc
    _emit(report.to_json(), args.out)
    return EXIT_OK


EXPECTED = {
    "movingknife": {strategy.Verdict.WRAT_VIOLATION},
    "simpleef": {strategy.Verdict.WRAT_VIOLATION},
    # a gain with no below-proportional outcome refutes risk-averse truthfulness
    "evenpaz": {strategy.Verdict.WRAT_VIOLATION, strategy.Verdict.WRAT_DETERRED_ONLY},
    "rotatingef": {strategy.Verdict.RAT_DETERRED},
}


def _scenario_for(args) -> strategy.Scenario:
    name = args.generator
    try:
        if name == "movingknife":
            s = strategy.movingknife_counterexample(args.n or 3)
        elif name == "evenpaz":
            s = strategy.evenpaz_counterexample(args.eps if args.eps is not None else Fraction(1, 20))
        elif name == "simpleef":
            s = strategy.simpleef_counterexample(args.n or 3)
        elif name == "rotatingef":
            s = strategy.rotatingef_counterexample(args.n or 2, args.eps if args.eps is not None else Fraction(1, 100))
        else:
            raise ParseError(f"unknown generator {name!r}")
    except strategy.StrategyError as exc:
        raise PreconditionError(str(exc)) from exc
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc
    if args.samples:
        extra = strategy.sample_profiles(s.n - 1, args.samples, seed=args.seed)
        s = s.with_profiles(s.opponent_profiles + tuple(extra))
    return s


def cmd_attack(args) -> int:
    if args.scenario:
        try:
            scenario = strategy.Scenario.from_json(_load_json(args.scenario))
        except (strategy.StrategyError, ValuationError, ValueError) as exc:
            raise ParseError(str(exc)) from exc
        expected = None
    elif args.generator:
        scenario = _scenario_for(args)
        expected = EXPECTED[args.generator]
    else:
        raise ParseError("attack needs a generator name or --scenario")
    try:
        certificate = strategy.classify_deviation(scenario)
    except (ValuationError, ValueError) as exc:
        raise PreconditionError(str(exc)) from exc
    payload = certificate.to_json()
    payload["replayed"] = strategy.replay(certificate)
    _emit(payload, args.out)
    if expected is None:
        return EXIT_OK
    return EXIT_OK if certificate.verdict in expected else EXIT_FAILED


def cmd_gadget(args) -> int:
    if not gadget.eps_is_small_enough(args.eps):
        log.error("eps = %s is too large; the final inequality does not close", args.eps)
        return EXIT_PRECONDITION
    external = None
    if args.external:
        try:
            external = ExternalMechanism(args.external)
        except OSError as exc:
            raise ProtocolError(f"cannot start {args.external!r}: {exc}") from exc
        mech = external
    elif args.mechanism:
        try:
            mech = mechanisms.get_mechanism(args.mechanism)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    else:
        raise ParseError("gadget needs --mechanism or --external")
    try:
        report = gadget.run_gadget(mech, args.eps)
    except gadget.GadgetError as exc:
        if external is not None:
            raise ProtocolError(str(exc)) from exc
        raise PreconditionError(str(exc)) from exc
    except (ValuationError, ValueError) as exc:
        raise PreconditionError(str(exc)) from exc
    finally:
        if external is not None:
            external.close()
    _emit(report.to_json(), args.out)
    confirmed = report.verdict in (gadget.Verdict.PROPORTIONALITY_VIOLATION, gadget.Verdict.TRUTHFULNESS_VIOLATION)
    return EXIT_OK if confirmed else EXIT_FAILED


def cmd_gen(args) -> int:
    name = args.name
    eps = args.eps if args.eps is not None else gadget.DEFAULT_EPS
    if name in {"F1", "F2", "F3", "F4", "F5", "F6"}:
        if not 0 < eps < 1:
            raise PreconditionError("eps must lie in (0, 1)")
        payload = profile_to_json(gadget.build_instances(gadget.GadgetState.canonical(eps))[name])
    elif name in {"ell", "rr"}:
        n = args.n or 2
        if n < 2:
            raise PreconditionError("n must be at least 2")
        payload = (ell if name == "ell" else rr)(n).to_json()
    elif name in EXPECTED:
        args.generator = name
        args.samples = 0
        s = _scenario_for(args)
        payload = profile_to_json(s.profile(s.opponent_profiles[0], s.true_f))
    else:
        raise ParseError(f"unknown generator {name!r}")
    _emit(payload, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cakecut", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a mechanism on a profile and audit the result")
    p.add_argument("--profile", required=True)
    p.add_argument("--mechanism", required=True, help=", ".join(m.value for m in mechanisms.MechanismId))
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit", help="audit an allocation against a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--allocation", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("attack", help="classify a misreport")
    p.add_argument("generator", nargs="?", help="movingknife, evenpaz, simpleef or rotatingef")
    p.add_argument("--scenario")
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=_rational)
    p.add_argument("--samples", type=int, default=20, help="extra random opponent profiles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("gadget", help="run the six-instance impossibility driver")
    p.add_argument("--mechanism")
    p.add_argument("--external", help="command speaking the line-delimited JSON protocol")
    p.add_argument("--eps", type=_rational, default=gadget.DEFAULT_EPS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("gen", help="emit a named density or profile")
    p.add_argument("name", help="F1..F6, ell, rr, movingknife, evenpaz, simpleef, rotatingef")
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=_rational)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except PreconditionError as exc:
        log.error("%s", exc)
        return EXIT_PRECONDITION
    except ProtocolError as exc:
        log.error("%s", exc)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
