"""
Covering Router
CLI commands for the covering radius and the Korkine-Zolotarev covering bounds

`covrad --in x.json` prints covrad(x), the deep hole, the sqrt(n)/2 check and
the product-form consequence.
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg, parse_json_arg, parse_parts
from services.covering import (
    INAPPLICABLE,
    composition_bound,
    covering_radius,
    decomposition_check,
    minkowski_covrad_check,
    product_form_bound,
    woods_bound,
)
from services.lattice_core import make_witness
from services.reduction import kz_reduce

router = CommandRouter("covrad", help="covering radius and covering bounds")

PRODUCT_FORM = "covrad² ≤ n/4 implies the inhomogeneous product minimum is at most 2^-n"
IN = arg("--in", dest="input", required=True, help="lattice JSON file")
TOL = arg("--tol", type=float, default=1e-6, help="absolute tolerance on covrad, at least 1e-6")


@router.command(arguments=[IN, TOL], theorem=PRODUCT_FORM)
def radius(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    cov = covering_radius(x, args.tol)
    return {
        "covrad": cov.value,
        "covrad_sq": cov.value_sq,
        "covrad_upper": cov.upper,
        "deep_hole": cov.deep_hole.tolist(),
        "tol": args.tol,
        "minkowski": minkowski_covrad_check(x, args.tol),
        "product_form": product_form_bound(x, args.tol),
    }


@router.command(
    "woods",
    help="per-block covering bound from A_1, covolume d and γ_{n+1}",
    arguments=[
        arg("--a1", type=float, required=True),
        arg("--d", type=float, required=True),
        arg("--n", type=int, required=True),
        arg("--gamma", type=float, help="γ_{n+1}; defaults to the gamma table"),
    ],
)
def woods(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    gamma = args.gamma if args.gamma is not None else ctx.gammas.gamma(args.n + 1)
    value = woods_bound(args.a1, args.d, args.n, gamma, ctx.variant)
    return {"bound": value, "applicable": value != INAPPLICABLE, "gamma": gamma, "variant": ctx.variant}


@router.command(
    "composition",
    help="sum of block bounds over a composition of n, from the KZ profile of a lattice",
    arguments=[IN, arg("--parts", required=True, help="composition, e.g. 1,2,1")],
)
def composition(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    profile = kz_reduce(ctx.lattice(args.input))
    parts = parse_parts(args.parts)
    value = composition_bound(profile, parts, ctx.gammas, ctx.variant)
    return {
        "parts": parts,
        "bound": value,
        "applicable": value != INAPPLICABLE,
        "kz_coefficients": [float(a) for a in profile.coefficients],
        "variant": ctx.variant,
    }


@router.command(
    "decomposition",
    help="covrad²(x) against covrad²(Λ) + covrad²(projection) for a primitive Λ",
    arguments=[IN, TOL, arg("--witness", required=True, help='coefficient rows as JSON, e.g. "[[1,0]]"')],
)
def decomposition(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    x = ctx.lattice(args.input)
    witness = make_witness(x, parse_json_arg(args.witness, "--witness"))
    return decomposition_check(x, witness, args.tol).to_json()
