"""Named completion methods and their composition.

Base methods: ``faccro``, ``vmclosure``, ``meanfill``, ``svt``,
``optspace-like``, ``meanfill-svd``, ``zerofill-svd``, ``riegel``.
Meta methods take an initialiser: ``smcb(<init>)`` and ``mos(<init>)``.
``a+b`` is shorthand for ``a(b)``, so ``mos(smcb+faccro)`` equals
``mos(smcb(faccro))``. A bare ``smcb`` or ``mos`` initialises with faccro.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .baselines import SvtConfig, riegel_complete, svt_complete
from .core import InvalidInputError, MaskedMatrix
from .rank1 import faccro_all
from .rankr import ClosureConfig, vmclosure_all
from .spectral import RefineConfig, estimate_rank, refine, smcb, truncate

BASE_METHODS = (
    "faccro",
    "vmclosure",
    "meanfill",
    "svt",
    "optspace-like",
    "meanfill-svd",
    "zerofill-svd",
    "riegel",
)
META_METHODS = ("smcb", "mos")
DEFAULT_INIT = "faccro"


@dataclass(frozen=True)
class MethodSpec:
    name: str
    init: MethodSpec | None = None

    def __str__(self) -> str:
        return self.name if self.init is None else f"{self.name}({self.init})"

    def walk(self):
        node = self
        while node is not None:
            yield node.name
            node = node.init


def parse_method(text: str) -> MethodSpec:
    """Parse a method expression; raises ``InvalidInputError`` on unknown names."""
    s = text.strip().lower()
    if not s:
        raise InvalidInputError("empty method name")
    paren, plus = s.find("("), s.find("+")
    if paren >= 0 and (plus < 0 or paren < plus):
        head, _, rest = s.partition("(")
        if not rest.endswith(")"):
            raise InvalidInputError(f"unbalanced parentheses in {text!r}")
        inner = rest[:-1]
        return _meta(head.strip(), parse_method(inner), text)
    if plus >= 0:
        head, _, rest = s.partition("+")
        return _meta(head.strip(), parse_method(rest), text)
    if s in META_METHODS:
        return MethodSpec(s, MethodSpec(DEFAULT_INIT))
    if s not in BASE_METHODS:
        raise InvalidInputError(f"unknown method {text!r}")
    return MethodSpec(s)


def _meta(head: str, init: MethodSpec, text: str) -> MethodSpec:
    if head not in META_METHODS:
        raise InvalidInputError(f"{head!r} in {text!r} does not take an initialiser")
    return MethodSpec(head, init)


def requires_positive(spec: MethodSpec, options: MethodOptions | None = None) -> bool:
    options = options or MethodOptions()
    names = set(spec.walk())
    if "faccro" in names:
        return True
    return "vmclosure" in names and options.weighting_mode == "multiplicative"


@dataclass(frozen=True)
class MethodOptions:
    """Tuning shared by all methods. ``rank=None`` estimates it from the spectrum."""

    rank: int | None = None
    max_rank: int = 10
    iterations: int = 100
    weighting_mode: str = "multiplicative"
    refine_max_iters: int = 200
    refine_rel_tol: float = 1e-8
    svt: SvtConfig = field(default_factory=SvtConfig)
    distances: tuple[float, ...] | None = None
    seed: int = 0

    def with_rank(self, rank: int | None) -> MethodOptions:
        return replace(self, rank=rank)


def _rank_for(filled: np.ndarray, options: MethodOptions) -> int:
    if options.rank is not None:
        return min(options.rank, min(filled.shape))
    limit = min(options.max_rank, min(filled.shape) - 1)
    if limit < 1:
        return 1
    return estimate_rank(filled, limit)


def _closure_config(A: MaskedMatrix, options: MethodOptions) -> ClosureConfig:
    if options.rank is not None:
        rank = options.rank
    elif (A.values[A.mask] > 0).all():
        rank = _rank_for(faccro_all(A).values, options)
    else:
        rank = _rank_for(A.mean_fill(), options)
    rank = max(1, min(rank, min(A.shape) - 1))
    return ClosureConfig(
        rank=rank,
        iterations=options.iterations,
        weighting_mode=options.weighting_mode,
        seed=options.seed,
    )


def run_method(spec: MethodSpec | str, A: MaskedMatrix, options: MethodOptions | None = None) -> np.ndarray:
    """Complete ``A`` with the named method and return a dense grid."""
    if isinstance(spec, str):
        spec = parse_method(spec)
    options = options or MethodOptions()
    if requires_positive(spec, options):
        A.require_positive()
    name = spec.name
    if name == "faccro":
        return faccro_all(A).values
    if name == "vmclosure":
        return vmclosure_all(A, _closure_config(A, options)).values
    if name == "meanfill":
        return A.mean_fill()
    if name == "svt":
        return svt_complete(A, options.svt, seed=options.seed)
    if name == "riegel":
        if options.distances is None:
            raise InvalidInputError("riegel needs per-column distances")
        return riegel_complete(A, options.distances).values
    if name == "meanfill-svd":
        fill = A.mean_fill()
        return truncate(fill, _rank_for(fill, options))
    if name == "zerofill-svd":
        return truncate(A.values, _rank_for(A.mean_fill(), options))
    if name == "optspace-like":
        fill = A.mean_fill()
        rank = _rank_for(fill, options)
        return refine(A, fill, _refine_config(rank, options))
    # meta methods
    init = run_method(spec.init, A, options)
    rank = _rank_for(init, options)
    if name == "smcb":
        return smcb(A, init, rank)
    if name == "mos":
        return refine(A, init, _refine_config(rank, options))
    raise InvalidInputError(f"unknown method {name!r}")


def _refine_config(rank: int, options: MethodOptions) -> RefineConfig:
    return RefineConfig(rank=rank, max_iters=options.refine_max_iters, rel_tol=options.refine_rel_tol)


def parse_methods(names: Sequence[str]) -> list[MethodSpec]:
    """Parse a list of method names, validating every one before any runs."""
    return [parse_method(n) for n in names]
