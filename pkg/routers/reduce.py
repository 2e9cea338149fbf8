"""
Reduction Router
CLI commands for LLL, Korkine-Zolotarev reduction, SVP, CVP and enumeration
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg, parse_json_arg
from services.reduction import closest_vector, enumerate_vectors, kz_reduce, lll_reduce, shortest_vector

router = CommandRouter("reduce", help="basis reduction and lattice-point search")

IN = arg("--in", dest="input", required=True, help="lattice JSON file")


@router.command("lll", help="LLL-reduced basis", arguments=[IN, arg("--delta", type=float, default=0.99)])
def lll(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    reduced = lll_reduce(ctx.lattice(args.input), args.delta)
    return {"delta": args.delta, "lattice": reduced.to_json()}


@router.command("kz", help="Korkine-Zolotarev basis and coefficients A_1..A_n", arguments=[IN])
def kz(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    profile = kz_reduce(ctx.lattice(args.input))
    result = profile.to_json()
    result["product"] = float(profile.coefficients.prod())
    return result


@router.command("svp", help="shortest nonzero vector", arguments=[IN])
def svp(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    sv = shortest_vector(ctx.lattice(args.input))
    return {"vector": sv.vector.tolist(), "length": sv.length, "coeffs": list(sv.coeffs)}


@router.command(
    "cvp",
    help="lattice vector closest to a target",
    arguments=[IN, arg("--target", required=True, help='JSON vector, e.g. "[0.5, 0.5]"')],
)
def cvp(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    cv = closest_vector(ctx.lattice(args.input), parse_json_arg(args.target, "--target"))
    return {"vector": cv.vector.tolist(), "distance": cv.distance, "coeffs": list(cv.coeffs)}


@router.command(
    "enumerate",
    help="all lattice vectors of norm at most a radius, one of each ± pair",
    arguments=[IN, arg("--radius", type=float, required=True)],
)
def enumerate_(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    found = enumerate_vectors(ctx.lattice(args.input), args.radius, sign_normalized=True)
    return {
        "radius": args.radius,
        "count": len(found.coeffs),
        "coeffs": found.coeffs.tolist(),
        "norms": found.norms.tolist(),
    }
