"""Complex Hermitian SDP modeling, real lowering and solving."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .backends import ENV_VAR, backend_name, run_backend
from .expressions import COMPLEX, HERMITIAN, Expr, Variable, as_expr, bmat
from .lowering import StandardForm, lower, recover_duals, recover_variables
from .program import EQ, PSD, TRACE, ConicProgram, embed, trace_norm_constraint, unembed

FEAS_TOL = 1e-8
GAP_TOL = 1e-7

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
INACCURATE = "inaccurate"


@dataclass(frozen=True)
class SolverResult:
    status: str
    primal_value: float
    dual_value: float
    witnesses: dict = field(repr=False)
    duals: dict = field(repr=False)
    residuals: float
    backend: str = "reference"
    iterations: int = 0

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def constraint_residual(con, values) -> float:
    v = con.expr.value(values)
    if con.kind == EQ:
        return float(np.max(np.abs(v), initial=0.0))
    if con.kind == TRACE:
        return max(0.0, float(v[0, 0].real) - con.bound)
    h = (v + v.conj().T) / 2
    return max(0.0, -float(np.linalg.eigvalsh(h)[0]))


def solve(prog: ConicProgram, feas_tol: float = FEAS_TOL, gap_tol: float = GAP_TOL,
          backend: str | None = None, max_iters: int = 100, verbose: bool = False) -> SolverResult:
    """Lower, solve and certify ``prog``.

    ``status == "optimal"`` is only reported when the recovered complex
    witnesses satisfy every constraint within ``feas_tol`` (relative to the
    size of the constant data) and the objective values agree within
    ``gap_tol`` (relative once they exceed 1).
    """
    name = backend_name(backend)
    sf = lower(prog)
    res = run_backend(sf, name, feas_tol=feas_tol, gap_tol=gap_tol, max_iters=max_iters, verbose=verbose)
    values = recover_variables(sf, res.x)
    by_name = {v.name: m for v, m in values.items()}
    duals = recover_duals(sf, prog, res.y, res.z)

    pval = sf.obj_sign * float(sf.c @ res.x) + sf.obj_offset
    dval = sf.obj_sign * float(sf.b @ res.y) + sf.obj_offset
    resid = max((constraint_residual(c, values) for c in prog.constraints), default=0.0)
    status = res.status
    if status == OPTIMAL:
        scale = max(1.0, float(np.max(np.abs(sf.b), initial=0.0)))
        if resid > feas_tol * scale or abs(pval - dval) > gap_tol * max(1.0, abs(pval), abs(dval)):
            status = INACCURATE
    if status == INFEASIBLE:
        pval = -np.inf if prog.sense == "max" else np.inf
    elif status == UNBOUNDED:
        pval = np.inf if prog.sense == "max" else -np.inf
    return SolverResult(status, pval, dval, by_name, duals, resid, name, res.iterations)


def dump_json(prog: ConicProgram, path=None) -> dict:
    """Self-describing JSON of the lowered standard form (optionally written to ``path``)."""
    data = lower(prog).to_dict()
    data["program"] = prog.name
    if path is not None:
        with open(path, "w") as fh:
            json.dump(data, fh)
    return data


__all__ = [
    "ConicProgram", "SolverResult", "StandardForm", "Variable", "Expr", "as_expr", "bmat",
    "embed", "unembed", "trace_norm_constraint", "solve", "lower", "dump_json",
    "HERMITIAN", "COMPLEX", "PSD", "EQ", "TRACE", "ENV_VAR",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "INACCURATE", "FEAS_TOL", "GAP_TOL",
]
