"""
Minkowski Router
CLI commands for the covering-condition verifier and certificate checks
"""
import argparse
from typing import Any, Dict

from routers.base import CommandRouter, Context, arg
from services.minkowski_verifier import CONDITION, check_certificate, read_certificate, verify_cover

router = CommandRouter("minkowski", help="covering-condition certificates")


@router.command(
    "verify",
    help="branch and bound over the KZ profiles of stable lattices",
    arguments=[
        arg("--dim", type=int, required=True),
        arg("--min-width", type=float, default=1e-3),
        arg("--deadline", type=float, help="wall-clock budget in seconds"),
    ],
    theorem=CONDITION,
)
def verify(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    cert = verify_cover(args.dim, args.min_width, ctx.gammas, args.deadline, ctx.variant)
    return cert.to_json()


@router.command(
    "check-cert",
    help="independent re-validation of a certificate by sampling",
    arguments=[
        arg("certificate", help="certificate JSON written by `minkowski verify`"),
        arg("--samples", type=int, default=10_000, help="points per leaf"),
        arg("--recheck-fraction", type=float, default=0.01),
    ],
    theorem=CONDITION,
)
def check_cert(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
    ctx.inputs.append(args.certificate)
    cert = read_certificate(args.certificate)
    return check_certificate(cert, args.samples, ctx.seed, ctx.gammas, args.recheck_fraction)
