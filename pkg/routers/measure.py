"""
Measure Router
CLI commands for the measure formulas and the Monte Carlo estimates
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg
from services import measure

router = CommandRouter("measure", help="invariant-measure formulas and random-lattice statistics")

STABLE_LIMIT = "the probability that a random unimodular lattice is stable tends to 1"
SIEGEL = "mean number of primitive vectors of norm < t equals V_n t^n / ζ(n)"

DIM = arg("--dim", type=int, required=True)
SAMPLES = arg("--samples", type=int, default=10_000)
SAMPLER = arg("--sampler", choices=[measure.EXACT_2D, measure.APPROX_ND], help="defaults to exact2d for n = 2")


@router.command("stable-fraction", help="Monte Carlo fraction of stable lattices", arguments=[DIM, SAMPLES, SAMPLER], theorem=STABLE_LIMIT)
def stable_fraction(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.estimate_stable_fraction(args.dim, args.samples, ctx.seed, args.sampler).to_json()


@router.command(
    "threshold",
    help="fraction with α_k ≥ t against the complement bound",
    arguments=[DIM, arg("--k", type=int, required=True), arg("--t", type=float, required=True), SAMPLES, SAMPLER],
    theorem=STABLE_LIMIT,
)
def threshold(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.threshold_fraction(args.dim, args.k, args.t, args.samples, ctx.seed, args.sampler)


@router.command(
    "siegel-check",
    help="mean primitive-vector count below t",
    arguments=[DIM, arg("--t", type=float, required=True), SAMPLES, SAMPLER],
    theorem=SIEGEL,
)
def siegel_check(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.siegel_check(args.dim, args.t, args.samples, ctx.seed, args.sampler)


@router.command("rankin", help="B(n,k)", arguments=[arg("--n", type=int, required=True), arg("--k", type=int, required=True)])
def rankin(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return {"n": args.n, "k": args.k, "B": measure.rankin_B(args.n, args.k), "log_B": measure.log_rankin_B(args.n, args.k)}


@router.command(
    "thunder",
    help="B(n,k)·t^n/n",
    arguments=[arg("--n", type=int, required=True), arg("--k", type=int, required=True), arg("--t", type=float, required=True)],
)
def thunder(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return {"n": args.n, "k": args.k, "t": args.t, "value": measure.thunder_value(args.n, args.k, args.t)}


@router.command(
    "rankin-growth",
    help="max of B(n,k)^(2/(k(n-k)))·n/C over a range of n",
    arguments=[
        arg("--n-min", type=int, default=measure.GROWTH_RANGE[0]),
        arg("--n-max", type=int, default=measure.GROWTH_RANGE[1]),
        arg("--c", type=float, default=60.0),
        arg("--k1-only", action="store_true"),
    ],
)
def rankin_growth(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.rankin_growth_check((args.n_min, args.n_max), args.c, not args.k1_only)


@router.command("thresholds", help="t(n,k) and n·thunder_value(n,k,t(n,k)) for every k", arguments=[DIM], theorem=STABLE_LIMIT)
def thresholds(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.threshold_report(args.dim, ctx.c1)


@router.command("quadrature-2d", help="exact stable fraction in dimension 2")
def quadrature(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.stable_fraction_quadrature_2d()


@router.command("ks", help="sampler diagnostic: K-S distance between two prime ranges", arguments=[DIM, arg("--samples", type=int, default=2000)])
def ks(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    return measure.sampler_ks_diagnostic(args.dim, args.samples, ctx.seed)
