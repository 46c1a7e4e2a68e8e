"""Experiment drivers: one table of bound values per figure.

Every experiment expands its grid into points, evaluates each point
independently (optionally in a process pool) and merges the rows in grid
order.  Randomness comes from one root seed per experiment, split per grid
point with :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import bounds, channels, qcore, variational
from ..qcore import SolverError, ValidationError

VALUE_FMT = "%.10g"
QUOTED_PPT_THRESHOLD = 0.66


@dataclass
class ExperimentSpec:
    name: str
    grid: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    plot: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.name!r}; known: {sorted(EXPERIMENTS)}")
        exp = EXPERIMENTS[self.name]
        unknown = set(self.grid) - set(exp.defaults)
        if unknown:
            raise ValidationError(f"unknown grid keys for {self.name}: {sorted(unknown)}; "
                                  f"known: {sorted(exp.defaults)}")
        full = dict(exp.defaults)
        full.update(self.grid)
        for k, v in full.items():
            if isinstance(v, (list, tuple)) and len(v) == 0:
                raise ValidationError(f"grid {k!r} is empty")
        self.grid = full


@dataclass
class ResultRow:
    experiment: str
    params: dict
    bound: str
    value: float
    gap: float
    status: str
    runtime_ms: float = 0.0


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    meta: dict

    def csv_text(self, timing: bool = True) -> str:
        return rows_to_csv(self.rows, timing)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _evaluate(experiment, params, bound, fn) -> ResultRow:
    t0 = time.perf_counter()
    try:
        res = fn()
        if isinstance(res, bounds.BoundResult):
            value, gap, status = res.value_bits, res.gap, res.status
        else:
            value, gap, status = float(res), 0.0, "optimal"
    except SolverError as exc:
        value, gap, status = math.nan, math.nan, f"solver_failure:{exc.status or 'error'}"
    ms = (time.perf_counter() - t0) * 1e3
    return ResultRow(experiment, dict(params), bound, float(value), float(gap), status, ms)


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _dims(spec):
    if isinstance(spec, str):
        return tuple(int(x) for x in spec.lower().split("x"))
    return tuple(int(x) for x in spec)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple, np.ndarray)) else [v]


def rho_v(p: float = 0.0) -> qcore.BipartiteState:
    """``(1 - p) rho_v + p I/9`` with ``rho_v`` the rank-two antisymmetric 3x3 state."""
    v1 = np.zeros(9)
    v1[1], v1[3] = 1, -1
    v2 = np.zeros(9)
    v2[2], v2[6] = 1, -1
    rv = (np.outer(v1, v1) + np.outer(v2, v2)) / 4
    return qcore.BipartiteState((1 - p) * rv + p * np.eye(9) / 9, (3, 3))


def random_separable(dims, n_terms, rng):
    da, db = dims
    w = rng.dirichlet(np.ones(n_terms))
    rho = 0
    for wi in w:
        a = qcore.ginibre(da, rng)
        b = qcore.ginibre(db, rng)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        rho = rho + wi * np.kron(np.outer(a, a.conj()), np.outer(b, b.conj()))
    return qcore.BipartiteState(rho, dims)


def random_npt(dims, rng, max_tries=1000):
    for _ in range(max_tries):
        rho = qcore.random_state(dims, seed=rng)
        if not qcore.is_ppt(rho):
            return rho
    raise ValidationError("could not sample an NPT state")


def ppt_threshold(gamma: float, tol: float = 1e-10) -> float:
    """Smallest depolarizing weight ``p`` at which the noisy Bell state is NPT (bisection on is_ppt)."""
    if qcore.is_ppt(channels.noisy_bell(gamma, 1.0)):
        return math.inf
    lo, hi = 0.0, 1.0
    if not qcore.is_ppt(channels.noisy_bell(gamma, lo)):
        return 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if qcore.is_ppt(channels.noisy_bell(gamma, mid)):
            lo = mid
        else:
            hi = mid
    return hi


FAST = {"with_dual": False}


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


class Experiment:
    name = ""
    defaults: dict = {}
    x_key = None
    group_keys: tuple = ()
    sweep_keys: tuple = ()

    def points(self, grid):
        keys = list(self.sweep_keys)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(_as_list(grid[k]) for k in keys))]

    def evaluate(self, point, grid, seed):
        raise NotImplementedError

    def meta(self, grid, rows):
        return {}


class ScatterCompare(Experiment):
    name = "scatter_compare"
    defaults = {"dims": "3x3", "rank": list(range(1, 10)), "n_states": 100,
                "bounds": ["e_nb2_half", "e_eta", "tempered_negativity"]}
    x_key = "rank"

    def points(self, grid):
        return [{"rank": int(r), "sample": s} for r in _as_list(grid["rank"])
                for s in range(int(_as_list(grid["n_states"])[0]))]

    def evaluate(self, point, grid, seed):
        dims = _dims(grid["dims"])
        rho = qcore.random_state(dims, point["rank"], seed=_seed_int(seed))
        out = []
        for b in _as_list(grid["bounds"]):
            kw = FAST if b == "e_nb2_half" else {}
            out.append(_evaluate(self.name, point, b, lambda b=b, kw=kw: bounds.STATE_BOUNDS[b](rho, **kw)))
        return out

    def meta(self, grid, rows):
        return {"fraction_nb2_ge": scatter_fractions(rows)}


def scatter_fractions(rows, tol=1e-6):
    """Per comparison bound and rank, the fraction of states where ``e_nb2_half`` is at least as large."""
    by = {}
    for r in rows:
        by.setdefault((r.params["rank"], r.params["sample"]), {})[r.bound] = r.value
    out = {}
    for (rank, _), vals in sorted(by.items()):
        if "e_nb2_half" not in vals:
            continue
        for b, v in vals.items():
            if b == "e_nb2_half":
                continue
            hit = vals["e_nb2_half"] >= v - tol
            acc = out.setdefault(b, {}).setdefault(str(rank), [0, 0])
            acc[0] += int(hit)
            acc[1] += 1
    return {b: {k: a[0] / a[1] for k, a in d.items()} for b, d in out.items()}


class Irreversibility(Experiment):
    name = "irreversibility"
    defaults = {"p": [0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015], "fw_gap_tol": 1e-4}
    sweep_keys = ("p",)
    x_key = "p"

    def evaluate(self, point, grid, seed):
        rho = rho_v(point["p"])
        params = bounds.FWParams(gap_tol=float(_as_list(grid["fw_gap_tol"])[0]))
        return [
            _evaluate(self.name, point, "e_nb2_half", lambda: bounds.e_nb2_half(rho)),
            _evaluate(self.name, point, "rains", lambda: bounds.rel_entropy_to_set(rho, "PPT'", params)),
        ]

    def meta(self, grid, rows):
        vals = {}
        for r in rows:
            vals.setdefault(r.params["p"], {})[r.bound] = (r.value, r.gap)
        margins = {str(p): v["e_nb2_half"][0] - v["rains"][0] for p, v in vals.items()
                   if "e_nb2_half" in v and "rains" in v}
        return {"noise": "(1-p) rho_v + p I/9", "margin_nb2_minus_rains": margins}


class NoisyBell(Experiment):
    name = "noisy_bell"
    defaults = {"panel": ["a", "b"], "x": [round(0.05 * i, 2) for i in range(21)], "gamma_a": 0.1, "p_b": 0.1,
                "bounds": ["e_nb2_half", "e_eta", "tempered_negativity", "e_f"]}
    sweep_keys = ("panel", "x")
    x_key = "x"
    group_keys = ("panel",)

    def evaluate(self, point, grid, seed):
        if point["panel"] == "a":
            gamma, p = float(_as_list(grid["gamma_a"])[0]), float(point["x"])
        else:
            gamma, p = float(point["x"]), float(_as_list(grid["p_b"])[0])
        params = {"panel": point["panel"], "x": point["x"], "gamma": gamma, "p": p}
        rho = channels.noisy_bell(gamma, p)
        out = [_evaluate(self.name, params, "is_ppt", lambda: float(qcore.is_ppt(rho)))]
        for b in _as_list(grid["bounds"]):
            if b == "e_f":
                fn = lambda: bounds.entanglement_of_formation_2q(rho)
            else:
                fn = lambda b=b: bounds.STATE_BOUNDS[b](rho, **(FAST if b == "e_nb2_half" else {}))
            out.append(_evaluate(self.name, params, b, fn))
        return out

    def meta(self, grid, rows):
        g = float(_as_list(grid["gamma_a"])[0])
        thr = ppt_threshold(g)
        return {
            "p_convention": "D(rho) = p rho + (1 - p) I/2, so larger p means less noise",
            "ppt_threshold_p_at_gamma_a": thr,
            "ppt_threshold_in_noise_weight_1_minus_p": 1.0 - thr,
            "quoted_threshold": QUOTED_PPT_THRESHOLD,
            "note": "the state is PPT for p at or below the computed threshold; the quoted 0.66 "
                    "matches the threshold only when p is read as the noise weight",
        }


class XXZCurve(Experiment):
    name = "xxz_curve"
    defaults = {"gamma": [0.1], "t_steps": 20, "bounds": ["e_nb2_half", "e_eta", "tempered_negativity"]}
    x_key = "t"
    group_keys = ("gamma",)

    def points(self, grid):
        n = int(_as_list(grid["t_steps"])[0])
        ts = [math.pi * k / n for k in range(n + 1)]
        return [{"gamma": float(g), "t": t} for g in _as_list(grid["gamma"]) for t in ts]

    def evaluate(self, point, grid, seed):
        ch = channels.xxz_noisy_step(point["t"], point["gamma"])
        j = qcore.choi_state(ch.realized, (2, 2, 2, 2))
        out = []
        for b in _as_list(grid["bounds"]):
            kw = FAST if b == "e_nb2_half" else {}
            out.append(_evaluate(self.name, point, b, lambda b=b, kw=kw: bounds.STATE_BOUNDS[b](j, **kw)))
        return out

    def meta(self, grid, rows):
        best = {}
        for r in rows:
            if r.bound == "e_nb2_half" and r.value == r.value:
                g = str(r.params["gamma"])
                if g not in best or r.value > best[g][1]:
                    best[g] = (r.params["t"], r.value)
        return {"noise": "damping toward |1> on qubit 1, applied once per t",
                "argmax_t_e_nb2_half": {g: v[0] for g, v in best.items()}}


class SwapDephase(Experiment):
    name = "swap_dephase"
    defaults = {"phi": [math.pi / 2, math.pi / 10], "p": [round(0.1 * i, 1) for i in range(11)]}
    sweep_keys = ("phi", "p")
    x_key = "p"
    group_keys = ("phi",)

    def evaluate(self, point, grid, seed):
        ch = channels.collective_dephased_swap(point["p"], point["phi"])
        return [_evaluate(self.name, point, "bipartite_channel_cost_lb",
                          lambda: channels.bipartite_channel_cost_lb(ch, (2, 2, 2, 2), **FAST))]


class WernerHolevo(Experiment):
    name = "werner_holevo"
    defaults = {"d": [5]}
    sweep_keys = ("d",)
    x_key = "d"

    def evaluate(self, point, grid, seed):
        ch = channels.werner_holevo(int(point["d"]))
        return [_evaluate(self.name, point, "channel_cost_lb", lambda: channels.channel_cost_lb(ch))]

    def meta(self, grid, rows):
        return {"reference_value_d5": 0.4854, "previous_bound": math.log2(4 / 3)}


class VariationalVsChoi(Experiment):
    name = "variational_vs_choi"
    defaults = {"n_channels": 20, "steps": 100, "step_size": 0.07, "depth": 10,
                "probs": [0.4, 0.4, 0.1, 0.1]}
    x_key = "channel"

    def points(self, grid):
        return [{"channel": i} for i in range(int(_as_list(grid["n_channels"])[0]))]

    def evaluate(self, point, grid, seed):
        s_channel, s_opt = seed.spawn(2)
        ch = variational.sample_mixed_unitary(_as_list(grid["probs"]), 4, _seed_int(s_channel))
        cfg = variational.OptimizerConfig(steps=int(_as_list(grid["steps"])[0]),
                                          step_size=float(_as_list(grid["step_size"])[0]),
                                          seed=_seed_int(s_opt), depth=int(_as_list(grid["depth"])[0]))
        choi = _evaluate(self.name, point, "choi", lambda: channels.channel_cost_lb(ch, **FAST))
        var = _evaluate(self.name, point, "variational", lambda: variational.optimize(ch, cfg).value)
        return [choi, var]

    def meta(self, grid, rows):
        vals = {}
        for r in rows:
            vals.setdefault(r.params["channel"], {})[r.bound] = r.value
        diffs = [v["variational"] - v["choi"] for v in vals.values() if len(v) == 2]
        return {"fraction_improved_1e-4": float(np.mean([d > 1e-4 for d in diffs])) if diffs else None,
                "min_difference": float(min(diffs)) if diffs else None}


class HierarchyAudit(Experiment):
    name = "hierarchy_audit"
    defaults = {"kind": ["ppt", "npt"], "n_samples": 20, "dims": "3x3", "k": [1, 2, 3]}
    x_key = "sample"
    group_keys = ("kind",)

    def points(self, grid):
        n = int(_as_list(grid["n_samples"])[0])
        return [{"kind": k, "sample": s} for k in _as_list(grid["kind"]) for s in range(n)]

    def evaluate(self, point, grid, seed):
        dims = _dims(grid["dims"])
        rng = np.random.default_rng(_seed_int(seed))
        ks = [int(k) for k in _as_list(grid["k"])]
        out = []
        if point["kind"] == "ppt":
            rho = random_separable(dims, 2 * dims[0] * dims[1], rng)
            for k in ks:
                if k >= 2:
                    out.append(_evaluate(self.name, point, f"member_ppt{k}",
                                         lambda k=k: float(bounds.ppt_k_membership(rho.matrix, dims, k))))
        else:
            rho = random_npt(dims, rng)
            out.append(_evaluate(self.name, point, "member_ppt2",
                                 lambda: float(bounds.ppt_k_membership(rho.matrix, dims, 2))))
            for k in ks:
                out.append(_evaluate(self.name, point, f"e_nb{k}_half",
                                     lambda k=k: bounds.e_nb_k_half(rho, k)))
        return out

    def meta(self, grid, rows):
        by = {}
        for r in rows:
            by.setdefault((r.params["kind"], r.params["sample"]), {})[r.bound] = r.value
        ppt_pass = all(v == 1.0 for (kind, _), d in by.items() if kind == "ppt"
                       for b, v in d.items() if b.startswith("member"))
        npt_fail = all(d.get("member_ppt2") == 0.0 for (kind, _), d in by.items() if kind == "npt")
        mono = True
        for (kind, _), d in by.items():
            if kind != "npt":
                continue
            seq = [d[b] for b in sorted(b for b in d if b.startswith("e_nb"))]
            mono &= all(b >= a - 1e-6 for a, b in zip(seq, seq[1:]))
        return {"ppt_all_members": ppt_pass, "npt_all_rejected_k2": npt_fail, "monotone_in_k": mono}


EXPERIMENTS = {e.name: e for e in (ScatterCompare(), Irreversibility(), NoisyBell(), XXZCurve(), SwapDephase(),
                                   WernerHolevo(), VariationalVsChoi(), HierarchyAudit())}


# ---------------------------------------------------------------------------
# running, CSV and plots
# ---------------------------------------------------------------------------


def _run_point(name, point, grid, seed):
    return EXPERIMENTS[name].evaluate(point, grid, seed)


def run(spec: ExperimentSpec) -> ExperimentResult:
    """Evaluate every grid point, write CSV/JSON (and SVG) when ``spec.out`` is set."""
    exp = EXPERIMENTS[spec.name]
    points = exp.points(spec.grid)
    seeds = np.random.SeedSequence(spec.seed).spawn(len(points))
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_point, [spec.name] * len(points), points,
                                   [spec.grid] * len(points), seeds))
    else:
        chunks = [_run_point(spec.name, p, spec.grid, s) for p, s in zip(points, seeds)]
    rows = [r for chunk in chunks for r in chunk]
    meta = {"experiment": spec.name, "seed": spec.seed, "grid": _jsonable(spec.grid)}
    meta.update(exp.meta(spec.grid, rows))
    result = ExperimentResult(spec, rows, meta)
    if spec.out is not None:
        os.makedirs(spec.out, exist_ok=True)
        base = os.path.join(spec.out, spec.name)
        with open(base + ".csv", "w", newline="") as fh:
            fh.write(result.csv_text())
        with open(base + "_meta.json", "w") as fh:
            json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
        if spec.plot:
            plot(result, base + ".svg")
    return result


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _fmt(v):
    if isinstance(v, float):
        return VALUE_FMT % v
    return str(v)


def rows_to_csv(rows, timing: bool = True) -> str:
    """CSV with columns ``experiment, <params...>, bound, value, gap, status[, runtime_ms]``."""
    keys = []
    for r in rows:
        for k in r.params:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    head = ["experiment"] + keys + ["bound", "value", "gap", "status"] + (["runtime_ms"] if timing else [])
    wr.writerow(head)
    for r in rows:
        line = [r.experiment] + [_fmt(r.params.get(k, "")) for k in keys]
        line += [r.bound, _fmt(r.value), _fmt(r.gap), r.status]
        if timing:
            line.append("%.1f" % r.runtime_ms)
        wr.writerow(line)
    return buf.getvalue()


def plot(result: ExperimentResult, path):
    """Standalone SVG: a scatter against ``e_nb2_half`` for scatter_compare, value curves otherwise."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    exp = EXPERIMENTS[result.spec.name]
    fig, ax = plt.subplots(figsize=(6, 4))
    if exp.name == "scatter_compare":
        by = {}
        for r in result.rows:
            by.setdefault((r.params["rank"], r.params["sample"]), {})[r.bound] = r.value
        for b in sorted({r.bound for r in result.rows} - {"e_nb2_half"}):
            pts = np.array([(d[b], d["e_nb2_half"]) for d in by.values() if b in d and "e_nb2_half" in d])
            if len(pts):
                ax.scatter(pts[:, 0], pts[:, 1], s=8, label=b)
        lim = max([r.value for r in result.rows if math.isfinite(r.value)] + [1e-3])
        ax.plot([0, lim], [0, lim], "r-", lw=1)
        ax.set_xlabel("comparison bound (bits)")
        ax.set_ylabel("e_nb2_half (bits)")
    else:
        x = exp.x_key
        groups = {}
        for r in result.rows:
            other = tuple((k, r.params[k]) for k in exp.group_keys)
            if r.bound == "is_ppt":
                continue
            groups.setdefault((other, r.bound), []).append((r.params[x], r.value))
        for (other, b), pts in groups.items():
            pts = sorted(pts)
            label = b + "".join(f" {k}={_fmt(v)}" for k, v in other)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=label)
        ax.set_xlabel(x)
        ax.set_ylabel("bits")
    ax.set_title(exp.name)
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
