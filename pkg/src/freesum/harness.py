"""
Batch experiments over families of homogeneous sums.

Each ``run_*`` function takes a plain dict (the parsed experiment spec file)
and returns an :class:`ExperimentReport`: ordered per-N rows plus a list of
pass/fail checks.  Every check compares a computed quantity with a stated
bound and records both, so a report never asserts anything silently.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .homsum import (
    CoefficientTensor,
    make_family,
    mirror_counterexample,
    qn_moment,
    quadratic_star,
    random_fully_symmetric,
    random_mirror_symmetric,
    resolve_assignment,
)
from .hyper import hypercontractivity_check
from .laws import Law, from_atoms, law_from_json, rademacher, semicircular
from .nc_core import catalan
from .rmt_oracle import estimate_qn_moment, estimate_trace_moment, gue, model_for_law
from .wigner_calc import fourth_moment_report
from .word_engine import FreeEvaluator

EXACT_TOL = 1e-9

__all__ = [
    "Check",
    "ExperimentReport",
    "lindeberg_telescope",
    "run_clt_sweep",
    "run_invariance_sweep",
    "run_counterexample_suite",
    "run_hyper_suite",
    "run_rmt_validation",
    "parse_laws",
    "semicircular_target",
    "to_json_text",
]


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@dataclass
class Check:
    """One asserted inequality: ``value`` against ``bound`` under ``relation``."""

    name: str
    passed: bool
    value: float | None = None
    bound: float | None = None
    relation: str = "<="
    N: int | None = None
    note: str = ""

    def as_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "N": self.N,
            "passed": self.passed,
            "value": self.value,
            "relation": self.relation,
            "bound": self.bound,
            "note": self.note,
        }


@dataclass
class ExperimentReport:
    experiment: str
    config: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, value: float, bound: float, relation: str = "<=", N=None, note: str = "") -> Check:
        """Record ``value relation bound`` and return the check."""
        ops: dict[str, Callable[[float, float], bool]] = {
            "<=": lambda a, b: a <= b,
            ">=": lambda a, b: a >= b,
            "<": lambda a, b: a < b,
            ">": lambda a, b: a > b,
        }
        ok = not math.isnan(value) and bool(ops[relation](value, bound))
        c = Check(name, ok, float(value), float(bound), relation, N, note)
        self.checks.append(c)
        return c

    def as_dict(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "config": self.config,
            "rows": self.rows,
            "checks": [c.as_dict() for c in self.checks],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return to_json_text(self.as_dict())

    def to_csv(self) -> tuple[str, str]:
        """``(rows_csv, checks_csv)``; floats use the same 17-significant-digit format as JSON."""
        return _csv(self.rows), _csv([c.as_dict() for c in self.checks])


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    # keep floats recognizable as floats
    return s if any(ch in s for ch in ".en") else s + ".0"


def to_json_text(obj: Any, indent: int = 2) -> str:
    """
    Deterministic JSON: keys in insertion order, floats with 17 significant
    digits, non-finite floats as ``null``.
    """
    out: list[str] = []

    def emit(x: Any, level: int):
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if x is None or isinstance(x, bool):
            out.append("null" if x is None else ("true" if x else "false"))
        elif isinstance(x, (int, np.integer)):
            out.append(str(int(x)))
        elif isinstance(x, (float, np.floating)):
            out.append(_fmt_float(float(x)))
        elif isinstance(x, str):
            out.append(_json_str(x))
        elif isinstance(x, Mapping):
            if not x:
                out.append("{}")
                return
            out.append("{\n")
            items = list(x.items())
            for k, (key, val) in enumerate(items):
                out.append(f"{inner}{_json_str(str(key))}: ")
                emit(val, level + 1)
                out.append(",\n" if k < len(items) - 1 else "\n")
            out.append(pad + "}")
        elif isinstance(x, (list, tuple)):
            if not x:
                out.append("[]")
                return
            if all(v is None or isinstance(v, (bool, int, float, str, np.integer, np.floating)) for v in x):
                out.append("[")
                for k, v in enumerate(x):
                    emit(v, level + 1)
                    if k < len(x) - 1:
                        out.append(", ")
                out.append("]")
                return
            out.append("[\n")
            for k, v in enumerate(x):
                out.append(inner)
                emit(v, level + 1)
                out.append(",\n" if k < len(x) - 1 else "\n")
            out.append(pad + "]")
        else:
            raise TypeError(f"cannot serialize {type(x).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _flatten(row: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = " ".join(_cell(x) for x in v)
        else:
            out[key] = v
    return out


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else format(float(v), ".17g")
    return str(v)


def _csv(rows: Sequence[Mapping[str, Any]]) -> str:
    flat = [_flatten(r) for r in rows]
    cols: list[str] = []
    for r in flat:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if cols:
        w.writerow(cols)
    for r in flat:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# spec helpers
# ---------------------------------------------------------------------------


def _grid(spec: Mapping, default: Sequence[int]) -> list[int]:
    grid = [int(n) for n in spec.get("N", default)]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"N grid must be strictly increasing, got {grid}")
    return grid


def parse_laws(obj, default: Law | None = None) -> Callable[[int], Law]:
    """
    Law assignment from a spec value.

    ``None`` gives ``default`` everywhere; a law object applies to every
    index; a list of law objects is cycled over the indices (index ``i`` gets
    item ``(i-1) mod len``); ``{"default": law, "per_index": {"i": law}}``
    overrides individual indices.
    """
    if obj is None:
        if default is None:
            raise ValueError("no law assignment given")
        return lambda i: default
    if isinstance(obj, Law):
        return lambda i: obj
    if isinstance(obj, str):
        obj = {"kind": obj}
    if isinstance(obj, list):
        if not obj:
            raise ValueError("empty law list")
        laws = [law_from_json(x if isinstance(x, Mapping) else {"kind": x}) for x in obj]
        return lambda i: laws[(i - 1) % len(laws)]
    if "per_index" in obj or "default" in obj:
        base = parse_laws(obj.get("default"), default)
        over = {int(k): law_from_json(v) for k, v in (obj.get("per_index") or {}).items()}
        return lambda i: over.get(i) or base(i)
    law = law_from_json(obj)
    return lambda i: law


def semicircular_target(m: int) -> float:
    """``m``-th moment of the standard semicircular law."""
    return float(catalan(m // 2)) if m % 2 == 0 else 0.0


def _family(spec: Mapping, N: int, default: str) -> CoefficientTensor:
    name = spec.get("family", default)
    params = dict(spec.get("params") or {})
    params["N"] = N
    return make_family(name, normalize=bool(spec.get("normalize", False)), **params)


def _uniform_kind(assign: Callable[[int], Law], N: int) -> str | None:
    kinds = {assign(i).kind for i in range(1, N + 1)}
    laws = {assign(i) for i in range(1, N + 1)}
    if len(laws) == 1 and kinds in ({"rademacher"}, {"semicircular"}):
        law = next(iter(laws))
        if law.kind == "semicircular" and law.params.get("variance", 1.0) != 1.0:
            return None
        return law.kind
    return None


def known_closed_form(f: CoefficientTensor, kind: str | None, m: int) -> float | None:
    """
    Exact values of ``phi(Q^m)`` derived by hand for the built-in families with
    identical standard laws, or ``None`` when no closed form is known.
    """
    N = f.N
    fam = f.family
    if fam == "constant_linear" and kind == "semicircular":
        return semicircular_target(m)
    if fam == "constant_linear" and kind == "rademacher" and m == 4:
        return 2.0 - 1.0 / N
    if fam == "constant_linear" and m in (1, 2) and kind:
        return float(m == 2)
    if fam == "quadratic_star" and m == 4:
        if kind == "semicircular":
            return 2.5
        if kind == "rademacher":
            return 2.0 - 1.0 / (2 * N - 2)
    return None


# ---------------------------------------------------------------------------
# Lindeberg telescoping
# ---------------------------------------------------------------------------


def lindeberg_telescope(
    f: CoefficientTensor,
    laws_x,
    laws_y,
    m: int,
    evaluator: FreeEvaluator | None = None,
) -> list[float]:
    """
    Per-step differences of the one-variable-at-a-time replacement.

    With hybrid vectors ``Z^(i) = (Y_1, ..., Y_{i-1}, X_i, ..., X_N)`` the
    ``i``-th step is ``phi(Q(Z^(i))^m) - phi(Q(Z^(i+1))^m)``, so the ``N``
    steps sum to ``phi(Q(X)^m) - phi(Q(Y)^m)``.
    """
    ax = resolve_assignment(laws_x, f.N)
    ay = resolve_assignment(laws_y, f.N)
    values = []
    for i in range(1, f.N + 2):
        hybrid = {j: (ay[j] if j < i else ax[j]) for j in range(1, f.N + 1)}
        values.append(qn_moment(f, hybrid, m, evaluator=evaluator))
    return [values[i] - values[i + 1] for i in range(f.N)]


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def _tol(spec: Mapping, key: str, default: float) -> float:
    return float((spec.get("tolerances") or {}).get(key, default))


def run_clt_sweep(spec: Mapping | None = None, evaluator: FreeEvaluator | None = None) -> ExperimentReport:
    """
    Moments of ``Q_N`` under the X laws over the N grid, with the distance to
    the standard semicircular moments and the free-influence maximum ``tau``.

    Checks: closed forms where known (exact tolerance), and that each
    distance is non-increasing along the grid.
    """
    spec = dict(spec or {})
    grid = _grid(spec, [2, 4, 8, 16, 32])
    orders = [int(m) for m in spec.get("moments", [4])]
    assign = parse_laws(spec.get("laws_x"), rademacher())
    tol = _tol(spec, "exact", EXACT_TOL)
    rep = ExperimentReport("clt", _config(spec, N=grid, moments=orders))
    dist: dict[int, list[tuple[int, float]]] = {m: [] for m in orders}
    for N in grid:
        f = _family(spec, N, "constant_linear")
        kind = _uniform_kind(assign, N)
        row: dict[str, Any] = {"N": N, "norm_sq": f.norm_sq, "tau": f.tau, "sqrt_tau": math.sqrt(f.tau)}
        for m in orders:
            value = qn_moment(f, assign, m, evaluator=evaluator)
            target = semicircular_target(m)
            row[f"m{m}"] = value
            row[f"target_m{m}"] = target
            row[f"dist_m{m}"] = abs(value - target)
            dist[m].append((N, abs(value - target)))
            exact = known_closed_form(f, kind, m)
            if exact is not None:
                row[f"closed_form_m{m}"] = exact
                rep.check(f"closed_form_m{m}", abs(value - exact), tol, N=N)
        rep.rows.append(row)
    for m, seq in dist.items():
        for (n0, a), (n1, b) in zip(seq, seq[1:]):
            rep.check(f"dist_m{m}_nonincreasing", b, a + tol, N=n1, note=f"compared with N={n0}")
    return rep


def run_invariance_sweep(spec: Mapping | None = None, evaluator: FreeEvaluator | None = None) -> ExperimentReport:
    """
    Gap ``Delta_m = phi(Q(X)^m) - phi(Q(Y)^m)`` against ``tau^(1/2)``.

    Checks: the Lindeberg steps sum to the gap at each N, and the ratio
    ``|Delta_m| / tau^(1/2)`` at the largest N is at most ``factor`` (default 2)
    times its maximum over the grid.  If ``tau`` does not decrease along the
    grid the sweep is marked uninformative.
    """
    spec = dict(spec or {})
    grid = _grid(spec, [4, 6, 8, 12, 16])
    m = int(spec.get("m", 4))
    ax = parse_laws(spec.get("laws_x"), rademacher())
    ay = parse_laws(spec.get("laws_y"), semicircular())
    tol = _tol(spec, "exact", EXACT_TOL)
    factor = _tol(spec, "ratio_factor", 2.0)
    default_family = {"family": "sliding_window", "params": {"k": 1}, "normalize": True}
    fam_spec = spec if "family" in spec else {**default_family, **spec}
    seed = int(spec.get("seed", 0))
    rep = ExperimentReport("invariance", _config(fam_spec, N=grid, m=m))
    ratios = []
    taus = []
    for N in grid:
        if fam_spec.get("family") == "random_fully_symmetric":
            rng = np.random.default_rng([seed, N])
            params = dict(fam_spec.get("params") or {})
            f = random_fully_symmetric(N, int(params.get("d", 2)), rng)
        else:
            f = _family(fam_spec, N, "sliding_window")
        mx = qn_moment(f, ax, m, evaluator=evaluator)
        my = qn_moment(f, ay, m, evaluator=evaluator)
        gap = mx - my
        steps = lindeberg_telescope(f, ax, ay, m, evaluator=evaluator)
        tele = math.fsum(steps)
        tau = f.tau
        ratio = abs(gap) / math.sqrt(tau) if tau > 0 else (0.0 if gap == 0 else math.inf)
        ratios.append(ratio)
        taus.append(tau)
        rep.rows.append(
            {
                "N": N,
                "norm_sq": f.norm_sq,
                "tau": tau,
                "sqrt_tau": math.sqrt(tau),
                f"m{m}_x": mx,
                f"m{m}_y": my,
                "gap": gap,
                "ratio": ratio,
                "telescope_sum": tele,
                "telescope_steps": steps,
            }
        )
        rep.check("telescope_identity", abs(tele - gap), tol, N=N)
    if grid:
        informative = all(b < a for a, b in zip(taus, taus[1:])) and len(grid) > 1
        note = "" if informative else "uninformative: tau does not vanish"
        if note:
            rep.notes.append(note)
        rep.check("ratio_bounded", ratios[-1], factor * max(ratios), N=grid[-1], note=note)
        rep.config["empirical_constant"] = max(ratios)
    return rep


def run_counterexample_suite(
    spec: Mapping | None = None, evaluator: FreeEvaluator | None = None
) -> ExperimentReport:
    """
    Three families that separate the free theory from its tempting shortcuts.

    (a) ``quadratic_star`` with Rademacher laws: the fourth moment tends to 2,
        checked against ``2 - 1/(2N-2)`` and the band ``|m_4 - 2| <= band/N``.
    (b) ``quadratic_star`` with semicircular laws: fourth moment ``5/2`` at every N.
    (c) ``mirror_counterexample``: ``tau = 1`` at every N while both contraction
        norms shrink, and the first-slot influence bound still holds.
    """
    spec = dict(spec or {})
    tol = _tol(spec, "exact", EXACT_TOL)
    band = _tol(spec, "band", 4.0)
    grid_a = _grid({"N": spec.get("N_rademacher", [2, 4, 8, 16, 32])}, [])
    grid_b = _grid({"N": spec.get("N_semicircular", list(range(2, 13)))}, [])
    grid_c = _grid({"N": spec.get("N_mirror", [5, 10, 20, 40])}, [])
    rep = ExperimentReport(
        "counterexamples",
        {"N_rademacher": grid_a, "N_semicircular": grid_b, "N_mirror": grid_c, "band": band, "exact_tol": tol},
    )
    prev = None
    for N in grid_a:
        f = quadratic_star(N)
        v = qn_moment(f, rademacher(), 4, evaluator=evaluator)
        exact = 2.0 - 1.0 / (2 * N - 2)
        rep.rows.append({"part": "a", "N": N, "m4": v, "dist_to_2": abs(v - 2.0), "closed_form": exact, "tau": f.tau})
        rep.check("a_closed_form", abs(v - exact), tol, N=N)
        rep.check("a_band", abs(v - 2.0), band / N, N=N)
        if prev is not None:
            rep.check("a_dist_decreasing", abs(v - 2.0), prev, "<", N=N)
        prev = abs(v - 2.0)
    for N in grid_b:
        f = quadratic_star(N)
        v = qn_moment(f, semicircular(), 4, evaluator=evaluator)
        rep.rows.append({"part": "b", "N": N, "m4": v, "tau": f.tau})
        rep.check("b_tetilla", abs(v - 2.5), tol, N=N)
    prev = None
    for N in grid_c:
        f = mirror_counterexample(N)
        fm = fourth_moment_report(f)
        n1, n2 = fm.contraction_norms[1], fm.contraction_norms[2]
        rep.rows.append(
            {
                "part": "c",
                "N": N,
                "norm_sq": f.norm_sq,
                "tau": f.tau,
                "norm_contr_1": n1,
                "norm_contr_2": n2,
                "m4": fm.fourth_moment,
                "influence_lower_bound": fm.influence_lower_bound,
            }
        )
        rep.check("c_norm_one", abs(f.norm_sq - 1.0), tol, N=N)
        rep.check("c_tau_one", abs(f.tau - 1.0), tol, N=N)
        rep.check("c_norms_equal", abs(n1 - n2), tol, N=N)
        rep.check("c_influence_inequality", fm.slack, -tol, ">=", N=N)
        if prev is not None:
            rep.check("c_norms_decreasing", n2, prev, "<", N=N)
        prev = n2
    return rep


def _hyper_law(kind: str, order: int, rng: np.random.Generator) -> Law:
    if kind == "rademacher":
        return rademacher(order)
    if kind == "semicircular":
        return semicircular(order=order)
    if kind == "atoms":
        # three atoms, centered and unit variance
        while True:
            x = rng.normal(size=3)
            w = rng.dirichlet(np.ones(3))
            x = x - np.dot(w, x)
            s = math.sqrt(float(np.dot(w, x * x)))
            if s > 1e-3 and w.min() > 1e-3:
                break
        w = w / math.fsum(w)
        atoms = [(float(a) / s, float(p)) for a, p in zip(x, w)]
        atoms[-1] = (atoms[-1][0], 1.0 - math.fsum(p for _, p in atoms[:-1]))
        return from_atoms(atoms, order=order, name="atoms")
    raise ValueError(f"unknown law type {kind!r}")


def run_hyper_suite(spec: Mapping | None = None, evaluator: FreeEvaluator | None = None) -> ExperimentReport:
    """
    Randomized check of ``phi(Q^{2r}) <= C_{r,d} mu_{2^{rd-1}} (sum f^2)^r``.

    Each instance draws a random mirror-symmetric tensor vanishing on
    diagonals and a law type; random atomic laws are drawn per index.
    """
    spec = dict(spec or {})
    seed = int(spec.get("seed", 0))
    count = int(spec.get("instances", 24))
    degrees = [int(d) for d in spec.get("d", [1, 2, 3])]
    rs = [int(r) for r in spec.get("r", [1, 2])]
    n_max = int(spec.get("N_max", 6))
    kinds = list(spec.get("laws", ["rademacher", "semicircular", "atoms"]))
    tol = _tol(spec, "exact", EXACT_TOL)
    rep = ExperimentReport(
        "hyper", {"seed": seed, "instances": count, "d": degrees, "r": rs, "N_max": n_max, "laws": kinds}
    )
    rng = np.random.default_rng(seed)
    for k in range(count):
        d = degrees[k % len(degrees)]
        r = rs[(k // len(degrees)) % len(rs)]
        kind = kinds[(k // (len(degrees) * len(rs))) % len(kinds)]
        N = int(rng.integers(max(d, 2), n_max + 1))
        f = random_mirror_symmetric(N, d, int(rng.integers(1, 4)), rng)
        order = max(2 ** (r * d), 2 * r * d)
        laws = {i: _hyper_law(kind, order, rng) for i in range(1, N + 1)}
        res = hypercontractivity_check(f, laws, r, evaluator=evaluator, tol=tol)
        rep.rows.append(
            {
                "instance": k,
                "d": d,
                "r": r,
                "N": N,
                "laws": kind,
                "moment": res.moment,
                "C": res.constant,
                "mu": res.mu,
                "norm_sq": res.norm_sq,
                "bound": res.bound,
                "ratio": res.ratio,
            }
        )
        rep.check("hyper_ratio", res.ratio, 1.0 + tol, N=N, note=f"instance {k}")
    return rep


def _mc_config(spec: Mapping) -> tuple[int, int, int]:
    mc = dict(spec.get("mc") or {})
    return int(mc.get("n", 512)), int(mc.get("samples", 100)), int(mc.get("seed", spec.get("seed", 0)))


DEFAULT_RMT_CONFIGS = [
    {"label": "gue_trace", "orders": [2, 4, 6, 8, 10, 12, 14]},
    {"family": "constant_linear", "params": {"N": 2}, "laws": "rademacher", "m": 4},
    {"family": "constant_linear", "params": {"N": 4}, "laws": "rademacher", "m": 4},
    {"family": "constant_linear", "params": {"N": 8}, "laws": "rademacher", "m": 4},
    {"family": "quadratic_star", "params": {"N": 4}, "laws": "semicircular", "m": 4},
    {"family": "quadratic_star", "params": {"N": 8}, "laws": "semicircular", "m": 4},
    {"family": "quadratic_star", "params": {"N": 4}, "laws": "rademacher", "m": 4},
    {"family": "quadratic_star", "params": {"N": 8}, "laws": "rademacher", "m": 4},
]


def run_rmt_validation(
    spec: Mapping | None = None, evaluator: FreeEvaluator | None = None, threads: int = 1
) -> ExperimentReport:
    """
    Monte Carlo estimates from random matrices against exact free moments.

    Check per estimate: ``|mean - exact| <= 3 stderr + C/n`` with ``C = 1``
    by default.  The ``C/n`` term is a heuristic budget for the finite-n
    freeness bias, not a proven bound.
    """
    spec = dict(spec or {})
    n, samples, seed = _mc_config(spec)
    bias_c = _tol(spec, "bias_constant", 1.0)
    configs = spec.get("configs", DEFAULT_RMT_CONFIGS)
    rep = ExperimentReport(
        "rmt", {"n": n, "samples": samples, "seed": seed, "bias_constant": bias_c, "configs": list(configs)}
    )
    rep.notes.append("band 3*stderr + C/n uses a heuristic bias budget C/n")
    for k, cfg in enumerate(configs):
        cfg = dict(cfg)
        cfg_seed = int(cfg.get("seed", seed + k))
        if cfg.get("label") == "gue_trace" or "family" not in cfg:
            orders = [int(x) for x in cfg.get("orders", [2, 4])]
            ests = estimate_trace_moment(gue(n), orders, samples, cfg_seed, threads=threads)
            items = [(f"gue_m{m}", semicircular_target(m), e) for m, e in zip(orders, ests)]
        else:
            f = make_family(cfg["family"], **dict(cfg.get("params") or {}))
            assign = parse_laws(cfg.get("laws"), semicircular())
            m = int(cfg.get("m", 4))
            laws = resolve_assignment(assign, f.N)
            exact = qn_moment(f, laws, m, evaluator=evaluator)
            models = [model_for_law(laws[i], n) for i in range(1, f.N + 1)]
            est = estimate_qn_moment(f, models, m, samples, cfg_seed, threads=threads)
            tag = cfg.get("laws") if isinstance(cfg.get("laws"), str) else "mixed"
            items = [(f"{cfg['family']}({f.N})_{tag}_m{m}", exact, est)]
        for label, exact, est in items:
            band = 3 * est.stderr + bias_c / n
            dev = abs(est.mean - exact)
            rep.rows.append(
                {
                    "label": label,
                    "seed": cfg_seed,
                    "exact": exact,
                    "mean": est.mean,
                    "stderr": est.stderr,
                    "samples": est.samples,
                    "deviation": dev,
                    "band": band,
                }
            )
            rep.check("mc_consistency", dev, band, note=label)
    return rep


def _config(spec: Mapping, **extra) -> dict[str, Any]:
    out = {k: v for k, v in spec.items() if k not in extra and k != "N"}
    out.update(extra)
    return out
