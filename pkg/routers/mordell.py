"""
Mordell Router
CLI commands for admissible boxes and bounds on the Mordell constant
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg, parse_json_arg, parse_parts
from services.mordell import block_form_bound, block_kappa_estimate, kappa_lower_estimate, kappa_n_bounds

router = CommandRouter("mordell", help="Mordell constant estimates and bounds")

ADMISSIBLE_BOX = "κ(x) ≥ 2^-n·vol(B) for every admissible symmetric box B"
BUDGET = arg("--budget", type=int, default=200, help="number of admissibility evaluations")


@router.command(
    "kappa",
    help="certified lower bound on κ(x) from an admissible box",
    arguments=[arg("--in", dest="input", required=True), BUDGET],
    theorem=ADMISSIBLE_BOX,
)
def kappa(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    return kappa_lower_estimate(x, args.budget, ctx.seed).to_json()


@router.command("bounds", help="closed-form lower bounds on κ_n", arguments=[arg("--dim", type=int, required=True)])
def bounds(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return kappa_n_bounds(args.dim)


@router.command(
    "block",
    help="block-triangular composition: product of per-block boxes, then a search on the whole lattice",
    arguments=[
        arg("--in", dest="inputs", action="append", required=True, help="one lattice file per diagonal block"),
        arg("--fill", default="0", help="below-diagonal entries: a number or a JSON matrix"),
        BUDGET,
    ],
    theorem=ADMISSIBLE_BOX,
)
def block(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    blocks = [ctx.lattice(path) for path in args.inputs]
    result = block_kappa_estimate(blocks, parse_json_arg(args.fill, "--fill"), args.budget, ctx.seed)
    return {
        "lattice": result["lattice"].to_json(),
        "block_values": result["block_values"],
        "product": result["product"],
        "estimate": result["estimate"].to_json(),
    }


@router.command(
    "form-bound",
    help="∏ n_i^(-n_i/2) for a block decomposition",
    arguments=[arg("--parts", required=True, help="block sizes, e.g. 2,2")],
)
def form_bound(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return block_form_bound(parse_parts(args.parts))
