"""
Command-line entry point

Run with:
    python services/main.py stability --in z3.json
    python -m services.main minkowski verify --dim 2 --out cert.json

Reports go to stdout (or --out) as JSON; logs go to stderr.
"""
import sys
from pathlib import Path

# Add project root to Python path so we can import routers
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import argparse
import json
import logging
from typing import Any, Dict, List, Optional

from models.reports import ErrorReport, ReportMeta, RunConfig
from routers.base import Context
from routers.covrad import router as covrad_router
from routers.measure import router as measure_router
from routers.minkowski import router as minkowski_router
from routers.mordell import router as mordell_router
from routers.orbit import router as orbit_router
from routers.reduce import router as reduce_router
from routers.stability import router as stability_router
from services import settings
from services.covering import GammaTable, default_gamma_table
from services.errors import DeadlineExceeded, DimensionCapError, GeometryError, ValidationError
from services.rng import PRNG_ID, as_seed
from services.tasks import task_pool

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAP = 3

# Namespace entries that are plumbing rather than command options
_RESERVED = {"command", "action", "handler", "theorem", "seed", "out", "gamma_table", "threads", "format", "c1", "variant"}


def _global_flags() -> argparse.ArgumentParser:
    """
    Flags accepted before or after any subcommand

    Defaults are SUPPRESS so a subparser never overwrites a value given
    earlier on the command line; dispatch fills in the real defaults.
    """
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="64-bit master seed")
    parent.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    parent.add_argument("--gamma-table", default=argparse.SUPPRESS, help="GammaTable JSON")
    parent.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="task pool size")
    parent.add_argument("--format", choices=["json", "pretty"], default=argparse.SUPPRESS)
    parent.add_argument("--c1", type=float, default=argparse.SUPPRESS, help="constant C1 of the stable-fraction threshold")
    parent.add_argument("--variant", choices=["lemma52", "literal"], default=argparse.SUPPRESS, help="Woods bound reading")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(prog=settings.TOOL_NAME, description="Geometry-of-numbers toolkit", parents=[parent])
    parser.add_argument("--version", action="version", version=f"{settings.TOOL_NAME} {settings.TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include routers
    for router in (
        stability_router,
        reduce_router,
        covrad_router,
        mordell_router,
        minkowski_router,
        measure_router,
        orbit_router,
    ):
        router.install(subparsers, [parent])
    return parser


def _setup_logging():
    logging.basicConfig(
        level=getattr(logging, settings.GON_LOG_LEVEL, logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _render(report: Dict[str, Any], fmt: str) -> str:
    if fmt == "pretty":
        return json.dumps(report, sort_keys=True, allow_nan=False, indent=2, ensure_ascii=False) + "\n"
    return json.dumps(report, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("✓ report written to %s", out)
    else:
        sys.stdout.write(text)


def _fail(e: GeometryError, code: int) -> int:
    sys.stderr.write(json.dumps(ErrorReport(error=str(e), kind=e.kind).model_dump(), ensure_ascii=False) + "\n")
    return code


def _envelope(result: Dict[str, Any], config: RunConfig, theorem: Optional[str]) -> Dict[str, Any]:
    meta = ReportMeta(
        tool=settings.TOOL_NAME,
        tool_version=settings.TOOL_VERSION,
        prng=PRNG_ID,
        seed=config.seed,
        theorem=theorem,
        config=config,
    )
    return {**result, "meta": meta.model_dump()}


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, run one command and write its report

    Returns:
        0 on success, 2 on validation or usage errors, 3 on a dimension cap or
        verifier deadline
    """
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    seed = as_seed(getattr(args, "seed", 0))
    out = getattr(args, "out", None)
    fmt = getattr(args, "format", "json")
    variant = getattr(args, "variant", settings.GON_WOODS_VARIANT)
    c1 = getattr(args, "c1", settings.GON_C1)
    gamma_path = getattr(args, "gamma_table", None)
    if hasattr(args, "threads"):
        task_pool.resize(args.threads)

    try:
        if variant not in ("lemma52", "literal"):
            raise ValidationError(f"GON_WOODS_VARIANT must be lemma52 or literal, got {variant!r}")
        if c1 is not None and c1 <= 0:
            raise ValidationError("--c1 must be positive")
        gammas = GammaTable.load(gamma_path) if gamma_path else default_gamma_table()
        ctx = Context(seed=seed, gammas=gammas, variant=variant, c1=c1)
        options = {k: v for k, v in sorted(vars(args).items()) if k not in _RESERVED}
        config = RunConfig(
            command=args.command,
            action=args.action,
            seed=seed,
            gamma_table=gamma_path,
            c1=c1,
            woods_variant=variant,
            out=out,
            format=fmt,
            options=options,
        )
        logger.debug("🔄 %s %s", args.command, args.action or "")
        try:
            result = args.handler(args, ctx)
        finally:
            config.inputs = list(ctx.inputs)
    except DeadlineExceeded as e:
        if e.partial is not None:
            _emit(_render(_envelope(e.partial.to_json(), config, args.theorem), fmt), out)
        return _fail(e, EXIT_CAP)
    except DimensionCapError as e:
        return _fail(e, EXIT_CAP)
    except ValidationError as e:
        return _fail(e, EXIT_VALIDATION)

    _emit(_render(_envelope(result, config, args.theorem), fmt), out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(dispatch())
