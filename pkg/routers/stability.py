"""
Stability Router
CLI commands for α, α_k, Min_δ and the canonical filtration

`stability --in x.json` prints the full stability report; the named actions
expose the individual invariants.
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg, parse_json_arg
from services.lattice_core import make_witness
from services.stability import alpha, alpha_k, canonical_filtration, complement_is_stable, min_delta

router = CommandRouter("stability", help="α(x), stability verdict and related invariants")

STABLE_IFF = "x is stable iff every subgroup has covolume ≥ 1, i.e. α(x) = 1"
IN = arg("--in", dest="input", required=True, help="lattice JSON file")


@router.command(arguments=[IN], theorem=STABLE_IFF)
def report(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    return alpha(x).to_json()


@router.command("alpha-k", help="minimum of |Λ|^(1/k) over rank-k subgroups", arguments=[IN, arg("--k", type=int, required=True)])
def rank_k(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    value, witness = alpha_k(x, args.k)
    return {"k": args.k, "alpha_k": value, "witness": witness.to_json()}


@router.command(
    "min-delta",
    help="span of the subgroups within a factor (1+δ) of α",
    arguments=[IN, arg("--delta", type=float, required=True), arg("--span-only", action="store_true", help="skip the member listing")],
)
def delta_span(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    return min_delta(x, args.delta, list_members=not args.span_only).to_json()


@router.command("filtration", help="canonical filtration 0 ⊂ Λ_1 ⊂ ... ⊂ x", arguments=[IN])
def filtration(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    flag = canonical_filtration(x)
    return {"length": len(flag) - 1, "steps": [w.to_json() for w in flag]}


@router.command(
    "complement",
    help="stability of a covolume-1 subgroup and of the projection orthogonal to it",
    arguments=[IN, arg("--witness", required=True, help='coefficient rows as JSON, e.g. "[[1,0,0]]"')],
)
def complement(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    witness = make_witness(x, parse_json_arg(args.witness, "--witness"))
    return complement_is_stable(x, witness)
