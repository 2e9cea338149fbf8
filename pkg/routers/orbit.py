"""
Orbit Router
CLI commands for the diagonal-orbit search and the dim_δ diagnostic
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg, parse_json_arg
from services.errors import ValidationError
from services.orbit_search import DiagonalPoint, search_max_alpha, uk_diagnostic

router = CommandRouter("orbit", help="search along diagonal orbits")

ORBIT_CLOSURE = "the closure of every diagonal orbit contains a stable lattice"
IN = arg("--in", dest="input", required=True, help="lattice JSON file")
AT = arg("--at", help="log coordinates of the diagonal point as JSON")


def _point(text, n: int):
    if text is None:
        return None
    coords = parse_json_arg(text, "--at")
    if not isinstance(coords, list) or len(coords) != n:
        raise ValidationError(f"--at needs {n} log coordinates")
    return DiagonalPoint(tuple(float(v) for v in coords))


@router.command(
    "search",
    help="maximize α(a·x) over the diagonal group",
    arguments=[
        IN,
        arg("--budget", type=int, default=2000, help="α evaluations"),
        arg("--chains", type=int, default=4),
        arg("--warm-start", dest="at", help="log coordinates to start chain 0 from"),
    ],
    theorem=ORBIT_CLOSURE,
)
def search(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    trace = search_max_alpha(x, args.budget, ctx.seed, chains=args.chains, warm_start=_point(args.at, x.dim))
    return trace.to_json()


@router.command(
    "uk",
    help="smallest k with dim_δ = k near δ = kε",
    arguments=[IN, arg("--epsilon", type=float, required=True), AT],
)
def uk(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    return uk_diagnostic(x, args.epsilon, _point(args.at, x.dim))
