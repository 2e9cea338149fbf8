"""
Command Router
Groups CLI subcommands under one prefix, the way the entry point expects

Each router module builds a `router = CommandRouter(prefix, ...)` and
registers handlers with `@router.command(...)`. services/main.py includes the
routers into one argparse tree. A handler takes the parsed namespace and the
shared Context and returns a JSON-ready dict.
"""
import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError as SchemaError

from models.lattice import LatticeFile
from services.covering import GammaTable
from services.errors import ValidationError
from services.lattice_core import Lattice

Handler = Callable[[argparse.Namespace, "Context"], Dict[str, Any]]


@dataclass
class Context:
    """Per-run resources resolved from the global flags"""

    seed: int
    gammas: GammaTable
    variant: str
    c1: Optional[float] = None
    inputs: List[str] = field(default_factory=list)

    def lattice(self, path: str) -> Lattice:
        self.inputs.append(path)
        return load_lattice(path)


@dataclass
class Command:
    name: Optional[str]
    help: str
    arguments: Sequence[Tuple[Tuple[str, ...], Dict[str, Any]]]
    handler: Handler
    theorem: Optional[str] = None


def arg(*flags: str, **kwargs: Any) -> Tuple[Tuple[str, ...], Dict[str, Any]]:
    return flags, kwargs


class CommandRouter:
    def __init__(self, prefix: str, help: str):
        self.prefix = prefix
        self.help = help
        self.commands: List[Command] = []

    def command(
        self,
        name: Optional[str] = None,
        help: str = "",
        arguments: Sequence[Tuple[Tuple[str, ...], Dict[str, Any]]] = (),
        theorem: Optional[str] = None,
    ):
        """Register a handler; name=None makes it the group's default action"""

        def decorator(fn: Handler) -> Handler:
            self.commands.append(Command(name, help, arguments, fn, theorem))
            return fn

        return decorator

    def install(self, subparsers, parents: Sequence[argparse.ArgumentParser]):
        group = subparsers.add_parser(self.prefix, help=self.help, parents=list(parents))
        group.set_defaults(command=self.prefix, action=None, handler=None, theorem=None)
        named = [c for c in self.commands if c.name is not None]
        for c in self.commands:
            if c.name is None:
                group.set_defaults(handler=_default_handler(group, c, bool(named)), theorem=c.theorem)
        if named:
            actions = group.add_subparsers(dest="action", required=not any(c.name is None for c in self.commands))
            for c in named:
                sub = actions.add_parser(c.name, help=c.help, parents=list(parents))
                for flags, kwargs in c.arguments:
                    sub.add_argument(*flags, **kwargs)
                sub.set_defaults(handler=c.handler, theorem=c.theorem)
        return group


def _default_handler(group: argparse.ArgumentParser, c: Command, has_actions: bool) -> Handler:
    """
    Put the default command's flags on the group parser

    With named actions next to it, `required=True` on the group would also
    fire for `group action --flag`, so required flags are checked when the
    default handler actually runs.
    """
    required: List[Tuple[str, str]] = []
    for flags, kwargs in c.arguments:
        kwargs = dict(kwargs)
        if has_actions and kwargs.pop("required", False):
            action = group.add_argument(*flags, **kwargs)
            required.append((action.dest, flags[0]))
        else:
            group.add_argument(*flags, **kwargs)

    def handler(args: argparse.Namespace, ctx: Context) -> Dict[str, Any]:
        for dest, flag in required:
            if getattr(args, dest, None) is None:
                raise ValidationError(f"{group.prog}: {flag} is required")
        return c.handler(args, ctx)

    return handler


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------

def load_lattice(path: str) -> Lattice:
    """Read a lattice JSON file; integer-only bases load in exact mode"""
    try:
        raw = LatticeFile.model_validate_json(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"lattice file not found: {path}")
    except SchemaError as e:
        raise ValidationError(f"bad lattice file {path}: {e.errors()[0]['msg']}")
    return Lattice.from_json({"dim": len(raw.basis), "basis": raw.basis, "rational": raw.exact})


def parse_json_arg(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{what} must be JSON: {e}")


def parse_parts(text: str) -> List[int]:
    try:
        return [int(p) for p in text.replace(" ", "").split(",") if p]
    except ValueError:
        raise ValidationError(f"bad composition {text!r}; expected e.g. 1,2,1")
