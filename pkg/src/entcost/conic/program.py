"""Symbolic conic programs over complex Hermitian matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..qcore import DimensionError, ValidationError
from .expressions import COMPLEX, HERMITIAN, Expr, Variable, as_expr

PSD = "psd"
EQ = "eq"
TRACE = "trace"


@dataclass
class Constraint:
    kind: str
    expr: Expr
    name: str
    bound: float = 0.0
    hermitian: bool = True


class ConicProgram:
    """Hermitian SDP built from affine expressions.

    Constraints are ``psd_block(E)`` (``E >= 0``), ``equality(E)`` (``E == 0``)
    and ``trace_bound(s, c)`` (``Re s <= c``).  The objective is the real
    part of a scalar expression.
    """

    def __init__(self, name: str = "program"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.sense = "max"
        self.objective = as_expr(0.0)
        self._names = set()

    def variable(self, name: str, dim: int, kind: str = HERMITIAN) -> Expr:
        if name in self._names:
            raise ValidationError(f"duplicate variable name {name!r}")
        v = Variable(name, dim, kind)
        self._names.add(name)
        self.variables.append(v)
        return v.expr()

    def _check(self, e: Expr):
        for v in e.terms:
            if v not in self.variables:
                raise ValidationError(f"expression references undeclared variable {v.name!r}")

    def _auto_name(self, prefix):
        return f"{prefix}{len(self.constraints)}"

    def _add(self, con: Constraint) -> Constraint:
        if any(c.name == con.name for c in self.constraints):
            raise ValidationError(f"duplicate constraint name {con.name!r}")
        self.constraints.append(con)
        return con

    def psd_block(self, expr, name: str | None = None) -> Constraint:
        e = as_expr(expr)
        self._check(e)
        if not e.is_hermitian(1e-10):
            raise ValidationError(f"psd_block {name or ''} expression is not Hermitian")
        return self._add(Constraint(PSD, e, name or self._auto_name("psd")))

    def equality(self, expr, name: str | None = None) -> Constraint:
        e = as_expr(expr)
        self._check(e)
        return self._add(Constraint(EQ, e, name or self._auto_name("eq"), hermitian=e.is_hermitian(1e-12)))

    def trace_bound(self, scalar, c: float, name: str | None = None) -> Constraint:
        e = as_expr(scalar)
        if e.shape != (1, 1):
            raise DimensionError("trace_bound expects a scalar expression")
        self._check(e)
        return self._add(Constraint(TRACE, e, name or self._auto_name("tb"), bound=float(c)))

    def maximize(self, scalar):
        self._set_objective(scalar, "max")

    def minimize(self, scalar):
        self._set_objective(scalar, "min")

    def _set_objective(self, scalar, sense):
        e = as_expr(scalar)
        if e.shape != (1, 1):
            raise DimensionError("objective must be a scalar expression")
        self._check(e)
        self.objective = e
        self.sense = sense

    def __repr__(self):
        return (f"ConicProgram({self.name!r}, {len(self.variables)} variables, "
                f"{len(self.constraints)} constraints, {self.sense})")


def trace_norm_constraint(prog: ConicProgram, x, c: float, name: str = "tn"):
    """Add ``||x||_1 <= c`` as ``x = P - N``, ``P, N >= 0``, ``tr(P + N) <= c``.

    Returns the expressions ``(P, N)``.
    """
    if c < 0:
        raise ValidationError("trace-norm bound must be nonnegative")
    x = as_expr(x)
    n = x.shape[0]
    P = prog.variable(f"{name}_P", n)
    N = prog.variable(f"{name}_N", n)
    prog.psd_block(P, f"{name}_P_psd")
    prog.psd_block(N, f"{name}_N_psd")
    prog.equality(x - P + N, f"{name}_split")
    prog.trace_bound((P + N).trace(), c, f"{name}_trace")
    return P, N


def embed(x) -> np.ndarray:
    """Real symmetric embedding ``A + iB -> [[A, -B], [B, A]]``."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError("embed expects a square matrix")
    if np.max(np.abs(x - x.conj().T), initial=0) > 1e-10 * max(1.0, np.max(np.abs(x), initial=0)):
        raise ValidationError("embed expects a Hermitian matrix")
    a, b = x.real, x.imag
    return np.block([[a, -b], [b, a]])


def unembed(y) -> np.ndarray:
    """Inverse of :func:`embed` after projecting onto the embedded subspace."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0] // 2
    a = (y[:n, :n] + y[n:, n:]) / 2
    b = (y[n:, :n] - y[:n, n:]) / 2
    z = a + 1j * b
    return (z + z.conj().T) / 2


__all__ = ["ConicProgram", "Constraint", "trace_norm_constraint", "embed", "unembed",
           "HERMITIAN", "COMPLEX"]
