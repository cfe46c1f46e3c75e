"""
Command-line front end.

    mahler volume SPEC [--force-mc]
    mahler mahler SPEC [--c-bm C]
    mahler verify-chain SPEC [--e1 FILE --e2 FILE]
    mahler bound-table N_MIN N_MAX [--c-bm C]
    mahler mvee FILE

Reports go to stdout (or ``--out``), logs to stderr. Exit status is 0 when
every check passes, 1 when a check fails and 2 on errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from mahler.bodies.base import SymBody
from mahler.bodies.families import Ellipsoid
from mahler.bodies.spec import build_body, load_body_spec
from mahler.config import get_settings
from mahler.ellipsoids import SandwichCertificate
from mahler.errors import BodySpecError, ConfigurationError, MahlerError
from mahler.log import configure_logging
from mahler.services.reports import Report, ReportEngine, RunConfig, render

LOG = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_volume(spec_path: str, config: RunConfig) -> Report:
    return ReportEngine(config).volume(load_body_spec(spec_path))


def cmd_mahler(spec_path: str, config: RunConfig) -> Report:
    return ReportEngine(config).mahler(load_body_spec(spec_path))


def _load_ellipsoid(path: str) -> Ellipsoid:
    body = load_body_spec(path)
    if not isinstance(body, Ellipsoid):
        raise BodySpecError(f"{path}: expected an ellipsoid spec, got {body.describe().get('type', 'op')!r}")
    return body


def cmd_verify_chain(
    spec_path: str,
    config: RunConfig,
    e1_path: Optional[str] = None,
    e2_path: Optional[str] = None,
) -> Report:
    """
    Verify the induction chain for a body.

    Without ``--e1``/``--e2`` the default certificate is used; the two flags
    must be given together.
    """
    K = load_body_spec(spec_path)
    cert = None
    if (e1_path is None) != (e2_path is None):
        raise ConfigurationError("--e1 and --e2 must be given together")
    if e1_path is not None and e2_path is not None:
        cert = SandwichCertificate.from_pair(_load_ellipsoid(e1_path), _load_ellipsoid(e2_path), source="user")
    return ReportEngine(config).chain(K, cert)


def cmd_bound_table(n_min: int, n_max: int, config: RunConfig) -> Report:
    return ReportEngine(config).bound_table(n_min, n_max)


def _read_mvee_input(path: str) -> Tuple[Optional[List[Any]], Optional[SymBody]]:
    """
    A points file ({"points": [...]} or a bare list) or a body spec.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BodySpecError(f"{path}: cannot read input ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodySpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(doc, list):
        return doc, None
    if isinstance(doc, dict) and "points" in doc:
        if set(doc) != {"points"} or not isinstance(doc["points"], list):
            raise BodySpecError(f"{path}: a points file holds exactly one list under 'points'")
        return doc["points"], None
    return None, build_body(doc)


def cmd_mvee(path: str, config: RunConfig) -> Report:
    points, body = _read_mvee_input(path)
    engine = ReportEngine(config)
    if body is not None:
        return engine.mvee_body(body)
    try:
        return engine.mvee_points(points)
    except ValueError as exc:
        if isinstance(exc, MahlerError):
            raise
        raise BodySpecError(f"{path}: points must be a rectangular list of numbers ({exc})") from None


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _tolerance(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} needs a number, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo samples per volume")
    common.add_argument("--seed", type=int, default=None, help="64-bit run seed")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--workers", type=int, default=None, help="threads for Monte Carlo shards")
    common.add_argument(
        "--tol",
        type=_tolerance,
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="override a tolerance (repeatable)",
    )

    parser = argparse.ArgumentParser(prog="mahler", description="Mahler volume products of symmetric convex bodies.")
    parser.add_argument("--log-level", default=None, help="stderr log level (default from MAHLER_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("volume", parents=[common], help="volume of a body")
    p.add_argument("spec")
    p.add_argument("--force-mc", action="store_true", help="Monte Carlo even when a closed form exists")
    p.set_defaults(handler=lambda a, c: cmd_volume(a.spec, c), default_format="json")

    p = sub.add_parser("mahler", parents=[common], help="normalized volume product and its bounds")
    p.add_argument("spec")
    p.add_argument("--force-mc", action="store_true")
    p.add_argument("--c-bm", type=float, default=None, help="comparison constant C for the line C^-n")
    p.set_defaults(handler=lambda a, c: cmd_mahler(a.spec, c), default_format="json")

    p = sub.add_parser("verify-chain", parents=[common], help="verify the sandwich-ratio induction")
    p.add_argument("spec")
    p.add_argument("--e1", default=None, help="inner ellipsoid spec")
    p.add_argument("--e2", default=None, help="outer ellipsoid spec")
    p.set_defaults(handler=lambda a, c: cmd_verify_chain(a.spec, c, a.e1, a.e2), default_format="json")

    p = sub.add_parser("bound-table", parents=[common], help="(log2 n)^-n over a dimension range")
    p.add_argument("n_min", type=int)
    p.add_argument("n_max", type=int)
    p.add_argument("--c-bm", type=float, default=None)
    p.set_defaults(handler=lambda a, c: cmd_bound_table(a.n_min, a.n_max, c), default_format="csv")

    p = sub.add_parser("mvee", parents=[common], help="minimum-volume centered ellipsoid")
    p.add_argument("input", help="points file or body spec")
    p.set_defaults(handler=lambda a, c: cmd_mvee(a.input, c), default_format="json")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    options: Dict[str, Any] = {
        "format": args.format or args.default_format,
        "out": args.out,
        "force_mc": getattr(args, "force_mc", False),
        "c_bm": getattr(args, "c_bm", None),
        "tolerances": dict(args.tol),
    }
    for name in ("samples", "seed", "workers"):
        value = getattr(args, name)
        if value is not None:
            options[name] = value
    try:
        return RunConfig(**options)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(part) for part in err["loc"])
        raise ConfigurationError(f"{where}: {err['msg']}") from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)

    try:
        config = _run_config(args)
        report = args.handler(args, config)
        text = render(report, config)
        if config.out:
            try:
                Path(config.out).write_text(text, encoding="utf-8")
            except OSError as exc:
                raise ConfigurationError(f"cannot write {config.out}: {exc.strerror}") from None
        else:
            sys.stdout.write(text)
    except MahlerError as exc:
        print(f"mahler: error: {exc}", file=sys.stderr)
        return 2

    if not report.passed:
        LOG.warning("%s: at least one check failed", args.command)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
