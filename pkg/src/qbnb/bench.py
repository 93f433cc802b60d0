"""Instance sweeps, exponential fits and summary tables."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .classical import classical_bnb
from .heuristics import by_name
from .primitives import EstimatorMode
from .problems import build_tree, gen_instance
from .solvers import iqbb, prepare

CSV_COLUMNS = ["kind", "n", "seed", "heuristic", "eps", "solver", "Q", "d_max",
               "charged_quantum", "value", "wall_ms"]

# Exponents alpha of Q ~ 2^(alpha n) reported for commercial MIP solvers
# (gurobi, cplex), and the spread of Q at the largest size, in percent.
REFERENCE_ALPHA = {"sk": {"gurobi": 0.494, "cplex": 0.513},
                   "mis": {"gurobi": 0.0373, "cplex": 0.0339},
                   "portfolio": {"gurobi": 0.195, "cplex": 0.140}}
REFERENCE_SPREAD = {"sk": {"gurobi": 173, "cplex": 187},
                    "mis": {"gurobi": 49, "cplex": 56},
                    "portfolio": {"gurobi": 45263, "cplex": 12587}}


@dataclass
class ExperimentRecord:
    kind: str
    n: int
    seed: int
    heuristic: str
    eps: float
    solver: str
    Q: int = None
    d_max: int = None
    charged_quantum: float = None
    value: object = None   # objective of the returned leaf, or "error: ..."
    wall_ms: float = None

    @property
    def failed(self):
        return isinstance(self.value, str)

    def row(self):
        return [("" if v is None else v) for v in asdict(self).values()]


@dataclass
class BenchConfig:
    kind: str = "sk"
    n_min: int = 8
    n_max: int = 14
    n_step: int = 2
    seeds: int = 10
    heuristic: str = "cost"
    eps: float = 0.0
    solver: str = "classical"
    jobs: int = 1
    out: str = None
    delta: float = 0.1
    estimator: str = "exact"
    bound: str = "frontier"
    seed_start: int = 0

    def grid(self):
        if self.n_step <= 0:
            raise ValueError("n_step must be positive")
        return list(range(self.n_min, self.n_max + 1, self.n_step))

    def tasks(self):
        return [(self.kind, n, s, self.heuristic, self.eps, self.solver, self.delta,
                 self.estimator, self.bound)
                for n in self.grid() for s in range(self.seed_start, self.seed_start + self.seeds)]


def parse_config(text):
    """Flat ``key = value`` lines (``#`` comments) into a BenchConfig."""
    types = {f.name: f.type for f in fields(BenchConfig)}
    cfg = BenchConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in types:
            raise ValueError(f"config line {lineno}: expected a known 'key = value'")
        kind = types[key]
        if kind == "int":
            setattr(cfg, key, int(val))
        elif kind == "float":
            setattr(cfg, key, float(val))
        else:
            setattr(cfg, key, val or None)
    return cfg


def solve_instance(task):
    """One sweep cell; failures come back as records whose value is an error string."""
    kind, n, seed, heuristic, eps, solver, delta, estimator, bound = task
    rec = ExperimentRecord(kind, n, seed, heuristic, eps, solver)
    t0 = time.perf_counter()
    try:
        tree = build_tree(gen_instance(kind, n, seed))
        prep = prepare(tree, by_name(heuristic))
        leaf, trace = classical_bnb(*prep, eps=eps)
        rec.Q, rec.d_max = trace.Q, trace.d_max_seen
        rec.charged_quantum = 0.0
        if solver == "classical":
            rec.value = tree.value(leaf.node)
        elif solver == "iqbb":
            res = iqbb(tree, eps=eps, delta=delta, mode=EstimatorMode.parse(estimator),
                       bound=bound, prepared=prep)
            rec.charged_quantum = res.ledger.charged_quantum
            rec.value = tree.value(res.leaf)
        else:
            raise ValueError(f"unknown solver {solver!r}")
    except Exception as e:  # recorded, the sweep goes on
        rec.Q = rec.d_max = rec.charged_quantum = None
        rec.value = f"error: {type(e).__name__}: {e}"
    rec.wall_ms = round((time.perf_counter() - t0) * 1000, 3)
    return rec


def run_experiment(config, out=None):
    """Run the sweep; rows are written to ``out`` (a text stream) in task order."""
    tasks = config.tasks()
    writer = None
    if out is not None:
        writer = csv.writer(out)
        writer.writerow(CSV_COLUMNS)
    records = []
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            results = ex.map(solve_instance, tasks)
            for rec in results:
                records.append(rec)
                if writer:
                    writer.writerow(rec.row())
                    out.flush()
    else:
        for task in tasks:
            rec = solve_instance(task)
            records.append(rec)
            if writer:
                writer.writerow(rec.row())
                out.flush()
    return records


def _num(s, cast):
    return None if s == "" else cast(s)


def _value(s):
    if s == "" or s.startswith("error"):
        return s or None
    return int(s) if s.lstrip("-").isdigit() else float(s)


def read_csv(fh):
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != CSV_COLUMNS:
        raise ValueError("unexpected CSV header")
    out = []
    for r in reader:
        if not r:
            continue
        out.append(ExperimentRecord(
            r[0], int(r[1]), int(r[2]), r[3], float(r[4]), r[5], _num(r[6], int),
            _num(r[7], int), _num(r[8], float), _value(r[9]), _num(r[10], float)))
    return out


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


@dataclass
class ScalingFit:
    alpha: float
    r2: float
    n_range: tuple
    medians: dict
    intercept: float = 0.0
    means: dict = field(default_factory=dict)

    @property
    def projected(self):
        """Exponent of the square-root speedup, alpha / 2."""
        return self.alpha / 2


def _by_n(records):
    groups = {}
    for r in records:
        if not r.failed and r.Q is not None:
            groups.setdefault(r.n, []).append(r)
    return dict(sorted(groups.items()))


def fit_scaling(records=None, medians=None):
    """Least squares of log2(median Q) on n.

    Pass either records or a ``{n: median_Q}`` mapping.
    """
    means = {}
    if medians is None:
        groups = _by_n(records or [])
        medians = {n: float(np.median([r.Q for r in g])) for n, g in groups.items()}
        means = {n: float(np.mean([r.Q for r in g])) for n, g in groups.items()}
    ns = sorted(medians)
    if len(ns) < 3:
        raise ValueError("fit needs at least 3 distinct n values")
    x = np.array(ns, dtype=float)
    y = np.log2([medians[n] for n in ns])
    A = np.vstack([x, np.ones_like(x)]).T
    (alpha, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (alpha * x + b)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    if ss_tot == 0:
        alpha = 0.0
    return ScalingFit(float(alpha), r2, (ns[0], ns[-1]), dict(medians), float(b), means)


def _ranks(v):
    v = np.asarray(v, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2
        i = j + 1
    return ranks


def spearman(x, y):
    """Spearman rank correlation with average ranks for ties; None if undefined."""
    rx, ry = _ranks(x), _ranks(y)
    if len(rx) < 2 or np.std(rx) == 0 or np.std(ry) == 0:
        return None
    return float(np.corrcoef(rx, ry)[0, 1])


def report(records):
    """Depth-ratio table, trend statistic, spread at the largest n, and fit summary."""
    groups = _by_n(records)
    if not groups:
        raise ValueError("no successful records to report on")
    ratio = {n: max(r.d_max for r in g) / n ** 2 for n, g in groups.items()}
    ns = list(ratio)
    if len(ns) < 2:
        trend = "insufficient data"
    else:
        rho = spearman(ns, [ratio[n] for n in ns])
        trend = "undefined (constant ratio)" if rho is None else rho
    n_top = ns[-1]
    qs = [r.Q for r in groups[n_top]]
    med = float(np.median(qs))
    spread = {"n": n_top, "percent": 100.0 * (max(qs) - min(qs)) / med}
    summary = {"kinds": sorted({r.kind for r in records}), "records": len(records),
               "failures": sum(1 for r in records if r.failed)}
    try:
        fit = fit_scaling(records)
        summary.update(alpha=fit.alpha, r2=fit.r2, projected_alpha=fit.projected,
                       medians=fit.medians, means=fit.means)
    except ValueError:
        summary["fit"] = "insufficient data"
    kinds = summary["kinds"]
    if len(kinds) == 1 and kinds[0] in REFERENCE_ALPHA:
        summary["reference_alpha"] = REFERENCE_ALPHA[kinds[0]]
        summary["reference_spread"] = REFERENCE_SPREAD[kinds[0]]
    return {"depth_ratio": ratio, "spearman": trend, "spread": spread, "summary": summary}


def format_report(rep):
    lines = ["n  max_dmax/n^2"]
    lines += [f"{n:<3}{v:.6f}" for n, v in rep["depth_ratio"].items()]
    sp = rep["spearman"]
    lines.append(f"spearman(ratio, n): {sp if isinstance(sp, str) else f'{sp:.4f}'}")
    lines.append(f"spread at n={rep['spread']['n']}: {rep['spread']['percent']:.1f}%")
    s = rep["summary"]
    if "alpha" in s:
        lines.append(f"alpha {s['alpha']:.4f}  r2 {s['r2']:.4f}  projected alpha/2 {s['projected_alpha']:.4f}")
    else:
        lines.append("fit: insufficient data")
    if "reference_alpha" in s:
        ref = ", ".join(f"{k} {v}" for k, v in s["reference_alpha"].items())
        lines.append(f"reference alpha ({ref})")
    lines.append(f"records {s['records']}  failures {s['failures']}")
    return "\n".join(lines)
